#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <tuple>

#include "mvsr/analysis.hpp"
#include "mvsr/errors.hpp"
#include "mvsr/experiment.hpp"
#include "mvsr/num_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        if (end > start) out.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

int default_jobs() {
    if (const char* env = std::getenv("MVSR_JOBS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

struct CommonFlags {
    std::string config_path;
    std::string benchmark;
    std::string data;
    std::string out_dir;
    std::string run_mode;
    std::string aggregation;
    std::string operators;
    std::string seeds;
    std::uint64_t seed = 0;
    double noise = -1.0;
    int max_size = 0;
    int view_index = -1;
    int jobs = 0;
    long long budget = -1;
    int population = -1;
    int pool_size = -1;
    int search_iterations = -1;
    int refit_iterations = -1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON configuration file");
    cmd->add_option("--benchmark", f.benchmark, "benchmark id (f1_views, f1_partial, f2_views, f3_views)");
    cmd->add_option("--data", f.data, "comma-separated CSV paths, one per view");
    cmd->add_option("--noise", f.noise, "noise rate in [0, 1)");
    cmd->add_option("--max-size", f.max_size, "maximum tree size");
    cmd->add_option("--budget", f.budget, "evaluation budget");
    cmd->add_option("--population", f.population, "population size");
    cmd->add_option("--pool-size", f.pool_size, "tournament pool size");
    cmd->add_option("--aggregation", f.aggregation, "max|average|median|min|harmonic_mean");
    cmd->add_option("--run-mode", f.run_mode, "mvsr|single_view|all_single_views");
    cmd->add_option("--view-index", f.view_index, "view for single_view mode (0-based)");
    cmd->add_option("--operators", f.operators, "comma-separated operator set");
    cmd->add_option("--seed", f.seed, "single seed (shorthand for --seeds N)");
    cmd->add_option("--seeds", f.seeds, "comma-separated seed list");
    cmd->add_option("--jobs", f.jobs, "parallel worker count (default: MVSR_JOBS or 1)");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--search-iterations", f.search_iterations, "LM iterations during search");
    cmd->add_option("--refit-iterations", f.refit_iterations, "LM iterations for scoring");
}

mvsr::ExperimentConfig build_config(const CommonFlags& f, const CLI::App* cmd) {
    mvsr::ExperimentConfig cfg;
    if (!f.config_path.empty()) cfg = mvsr::load_config_file(f.config_path);
    if (cfg.jobs == 1) cfg.jobs = default_jobs();

    if (cmd->count("--benchmark")) {
        auto id = mvsr::benchmark_from_string(f.benchmark);
        if (!id) throw mvsr::ConfigError("unknown benchmark '" + f.benchmark + "'");
        cfg.benchmark = id;
        cfg.csv_paths.clear();
    }
    if (cmd->count("--data")) {
        cfg.csv_paths = split_list(f.data);
        cfg.benchmark.reset();
    }
    if (cmd->count("--noise")) cfg.noise = f.noise;
    if (cmd->count("--max-size")) cfg.gp.max_size = f.max_size;
    if (cmd->count("--budget")) cfg.gp.evaluation_budget = static_cast<std::size_t>(f.budget);
    if (cmd->count("--population")) cfg.gp.population_size = f.population;
    if (cmd->count("--pool-size")) cfg.gp.pool_size = f.pool_size;
    if (cmd->count("--aggregation")) {
        auto kind = mvsr::aggregation_from_string(f.aggregation);
        if (!kind) throw mvsr::ConfigError("unknown aggregation '" + f.aggregation + "'");
        cfg.aggregation = *kind;
    }
    if (cmd->count("--run-mode")) {
        if (f.run_mode == "mvsr") cfg.run_mode.kind = mvsr::RunMode::Kind::kMvsr;
        else if (f.run_mode == "single_view")
            cfg.run_mode.kind = mvsr::RunMode::Kind::kSingleView;
        else if (f.run_mode == "all_single_views")
            cfg.run_mode.kind = mvsr::RunMode::Kind::kAllSingleViews;
        else throw mvsr::ConfigError("unknown run_mode '" + f.run_mode + "'");
    }
    if (cmd->count("--view-index")) cfg.run_mode.view_index = f.view_index;
    if (cmd->count("--operators")) {
        // reuse the config-side name validation
        json j{{"operators", split_list(f.operators)}};
        cfg.gp.operators = mvsr::parse_config(j.dump()).gp.operators;
    }
    if (cmd->count("--seeds")) {
        cfg.seeds.clear();
        for (const auto& tok : split_list(f.seeds)) cfg.seeds.push_back(std::stoull(tok));
    }
    if (cmd->count("--seed")) cfg.seeds = {f.seed};
    if (cmd->count("--jobs")) cfg.jobs = f.jobs;
    if (cmd->count("--out")) cfg.out_dir = f.out_dir;
    if (cmd->count("--search-iterations")) cfg.search_iterations = f.search_iterations;
    if (cmd->count("--refit-iterations")) cfg.refit_iterations = f.refit_iterations;
    return cfg;
}

void report_param_bounds(const mvsr::ExperimentConfig& cfg) {
    if (cfg.param_bound_lower || cfg.param_bound_upper) {
        std::cout << "advisory parameter bounds: l="
                  << (cfg.param_bound_lower ? std::to_string(*cfg.param_bound_lower) : "-")
                  << " u="
                  << (cfg.param_bound_upper ? std::to_string(*cfg.param_bound_upper) : "-")
                  << " (reported, not enforced)\n";
    }
}

int cmd_run(const CommonFlags& flags, const CLI::App* cmd) {
    auto cfg = build_config(flags, cmd);
    mvsr::validate(cfg);
    report_param_bounds(cfg);
    auto records = mvsr::run_experiment(cfg);
    fs::create_directories(cfg.out_dir);
    fs::path out = fs::path(cfg.out_dir) / "results.csv";
    mvsr::write_results_csv(out, records);
    std::cout << "wrote " << out.string() << " (" << records.size() << " records)\n";
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const CLI::App* cmd, const std::string& noises_text,
              const std::string& sizes_text) {
    auto cfg = build_config(flags, cmd);
    mvsr::validate(cfg);
    report_param_bounds(cfg);
    auto noises = mvsr::parse_noise_list(noises_text);
    auto sizes = mvsr::parse_size_list(sizes_text);
    auto result = mvsr::sweep(cfg, noises, sizes);
    fs::create_directories(cfg.out_dir);
    fs::path results = fs::path(cfg.out_dir) / "results.csv";
    fs::path heatmap = fs::path(cfg.out_dir) / "heatmap.csv";
    mvsr::write_results_csv(results, result.records);
    mvsr::write_heatmap_csv(heatmap, result.heatmap);
    std::cout << "wrote " << results.string() << " (" << result.records.size()
              << " records) and " << heatmap.string() << " (" << result.heatmap.size()
              << " cells)\n";
    return 0;
}

int cmd_generate(const std::string& benchmark, double noise, std::uint64_t seed,
                 const std::string& out_dir) {
    auto id = mvsr::benchmark_from_string(benchmark);
    if (!id) throw mvsr::ConfigError("unknown benchmark '" + benchmark + "'");
    auto vs = mvsr::generate_benchmark(*id, {noise, 0}, seed);
    fs::create_directories(out_dir);

    for (std::size_t i = 0; i < vs.k(); ++i) {
        fs::path noisy = fs::path(out_dir) / ("view_" + std::to_string(i) + ".csv");
        mvsr::write_csv(vs.views[i], noisy);
        mvsr::Dataset clean = vs.views[i];
        clean.y = vs.provenance.noiseless_y[i];
        fs::path ref = fs::path(out_dir) / ("view_" + std::to_string(i) + "_noiseless.csv");
        mvsr::write_csv(clean, ref);
    }

    json prov;
    prov["benchmark"] = benchmark;
    prov["noise"] = noise;
    prov["seed"] = seed;
    prov["dim"] = vs.dim();
    prov["true_n_params"] = vs.provenance.true_n_params;
    prov["true_thetas"] = vs.provenance.true_thetas;
    prov["true_skeleton"] = mvsr::format(mvsr::true_model(*id).skeleton);
    std::ofstream out(fs::path(out_dir) / "provenance.json");
    if (!out) throw mvsr::IoError("cannot write provenance.json");
    out << prov.dump(2) << '\n';

    std::cout << "wrote " << vs.k() << " views to " << out_dir << "\n";
    return 0;
}

int cmd_score(const std::string& model_text, const std::string& data, int iterations) {
    mvsr::Expression expr = mvsr::parse(model_text);
    mvsr::ParametricModel model;
    if (expr.max_parameter_index() >= 0) {
        // Already a skeleton; parameters start from the documented all-ones guess.
        model = mvsr::skeleton_model(std::move(expr));
    } else {
        model = mvsr::parameterize(expr);
    }

    auto paths = split_list(data);
    if (paths.empty()) throw mvsr::ConfigError("--data needs at least one CSV");

    mvsr::LmOptions opts;
    opts.max_iterations = iterations;

    json out;
    out["model"] = mvsr::format(model.skeleton);
    out["n_params"] = model.n_params();
    out["theta0"] = model.initial_guess;
    double total = 0.0;
    bool all_finite = true;
    json per_view = json::array();
    for (const auto& path : paths) {
        mvsr::Dataset d = mvsr::load_csv(path);
        auto fit = mvsr::lm_fit(model, d, model.initial_guess, opts);
        json v;
        v["data"] = path;
        v["loss"] = fit.loss;
        v["theta"] = fit.theta;
        v["converged"] = fit.converged;
        per_view.push_back(std::move(v));
        if (!fit.finite || !std::isfinite(fit.loss)) all_finite = false;
        else total += fit.loss;
    }
    out["per_view"] = per_view;
    out["score"] = all_finite ? json(total / static_cast<double>(paths.size()))
                              : json("inf");
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_rank(const std::string& results) {
    auto paths = split_list(results);
    if (paths.empty()) throw mvsr::ConfigError("--results needs at least one CSV");
    std::vector<mvsr::ResultRecord> records;
    for (const auto& p : paths) {
        auto part = mvsr::read_results_csv(p);
        records.insert(records.end(), part.begin(), part.end());
    }
    if (records.empty()) throw mvsr::ConfigError("no records to rank");

    // One instance per (function, noise, max_size); the instance delta of a
    // method is its mean |n_params - n_true| over seeds.
    std::map<std::string, std::map<std::tuple<std::string, double, int>, std::pair<double, int>>>
        by_method;
    std::set<std::tuple<std::string, double, int>> instances;
    for (const auto& r : records) {
        auto id = mvsr::benchmark_from_string(r.function);
        if (!id)
            throw mvsr::ConfigError("cannot rank non-benchmark function '" + r.function + "'");
        int delta = mvsr::param_delta(r.n_params, mvsr::true_param_count(*id));
        auto key = std::make_tuple(r.function, r.noise, r.max_size);
        auto& cell = by_method[r.run_mode][key];
        cell.first += delta;
        cell.second += 1;
        instances.insert(key);
    }

    std::vector<std::string> methods;
    for (const auto& [name, cells] : by_method) methods.push_back(name);
    std::vector<std::vector<double>> deltas(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
        for (const auto& inst : instances) {
            const auto& cells = by_method[methods[m]];
            auto it = cells.find(inst);
            if (it == cells.end())
                throw mvsr::ConfigError("method '" + methods[m] +
                                        "' is missing runs for an instance; rank needs a "
                                        "complete method x instance grid");
            deltas[m].push_back(it->second.first / it->second.second);
        }
    }

    auto table = mvsr::average_ranks(methods, deltas);
    json out;
    out["instances"] = table.n_instances;
    out["friedman_chi2"] = table.friedman_chi2;
    json ranks = json::array();
    for (std::size_t m = 0; m < methods.size(); ++m) {
        json row;
        row["method"] = methods[m];
        row["average_rank"] = table.average_rank[m];
        ranks.push_back(std::move(row));
    }
    out["methods"] = ranks;
    std::cout << out.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-view symbolic regression"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    auto* run = app.add_subcommand("run", "run an experiment from a config");
    add_common_flags(run, run_flags);

    CommonFlags sweep_flags;
    std::string noises_text = "0,0.033,0.066,0.1";
    std::string sizes_text = "5:25:2";
    auto* sweep_cmd = app.add_subcommand("sweep", "run a noise x size grid");
    add_common_flags(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--noises", noises_text, "comma-separated noise rates");
    sweep_cmd->add_option("--sizes", sizes_text, "size list (comma) or start:end:step");

    std::string gen_benchmark;
    double gen_noise = 0.0;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "out";
    auto* gen = app.add_subcommand("generate", "dump a benchmark view set as CSVs");
    gen->add_option("--benchmark", gen_benchmark)->required();
    gen->add_option("--noise", gen_noise);
    gen->add_option("--seed", gen_seed);
    gen->add_option("--out", gen_out);

    std::string score_model;
    std::string score_data;
    int score_iterations = 100;
    auto* score = app.add_subcommand("score", "refit an expression against CSV views");
    score->add_option("--model", score_model)->required();
    score->add_option("--data", score_data)->required();
    score->add_option("--iterations", score_iterations);

    std::string rank_results;
    auto* rank = app.add_subcommand("rank", "average parameter-count ranks over results");
    rank->add_option("--results", rank_results)->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(run_flags, run);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_flags, sweep_cmd, noises_text, sizes_text);
        if (gen->parsed()) return cmd_generate(gen_benchmark, gen_noise, gen_seed, gen_out);
        if (score->parsed()) return cmd_score(score_model, score_data, score_iterations);
        if (rank->parsed()) return cmd_rank(rank_results);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const mvsr::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mvsr::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mvsr::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
