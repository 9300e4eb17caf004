#include "mvsr/experiment.hpp"

#include <chrono>
#include <fstream>
#include <json.hpp>

#include "mvsr/errors.hpp"
#include "mvsr/parallel.hpp"

namespace mvsr {
namespace {

using nlohmann::json;

const std::vector<std::pair<std::string_view, NodeKind>> kOperatorNames = {
    {"add", NodeKind::kAdd},       {"sub", NodeKind::kSub},   {"mul", NodeKind::kMul},
    {"div", NodeKind::kDiv},       {"pow", NodeKind::kPow},   {"square", NodeKind::kSquare},
    {"exp", NodeKind::kExp},       {"sqrt", NodeKind::kSqrt}, {"sin", NodeKind::kSin},
    {"log", NodeKind::kLog},       {"abs", NodeKind::kAbs},   {"neg", NodeKind::kNeg},
};

NodeKind operator_from_name(const std::string& name) {
    for (auto& [n, k] : kOperatorNames)
        if (n == name) return k;
    throw ConfigError("unknown operator '" + name + "'");
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

struct Task {
    double noise;
    int max_size;
    std::uint64_t seed;
    RunMode mode;
};

std::vector<RunMode> expand_modes(const ExperimentConfig& cfg, std::size_t k) {
    if (cfg.run_mode.kind != RunMode::Kind::kAllSingleViews) return {cfg.run_mode};
    std::vector<RunMode> out;
    for (std::size_t i = 0; i < k; ++i)
        out.push_back(RunMode{RunMode::Kind::kSingleView, static_cast<int>(i)});
    return out;
}

std::vector<ResultRecord> run_tasks(const ExperimentConfig& cfg, const std::vector<Task>& tasks) {
    // CSV views are loaded once, up front: any I/O problem aborts the batch
    // before work starts, and every task shares the read-only data.
    std::optional<ViewSet> external;
    if (!cfg.benchmark) external = viewset_from_csv(cfg.csv_paths);

    int inner_threads = tasks.size() == 1 ? cfg.jobs : 1;
    std::vector<ResultRecord> records(tasks.size());

    parallel_for(tasks.size(), cfg.jobs, [&](std::size_t t) {
        const Task& task = tasks[t];
        auto t0 = std::chrono::steady_clock::now();

        ViewSet full;
        if (cfg.benchmark) {
            NoiseSpec noise{task.noise, 0};
            full = cfg.view_thetas
                       ? generate_benchmark(*cfg.benchmark, noise, task.seed, *cfg.view_thetas)
                       : generate_benchmark(*cfg.benchmark, noise, task.seed);
        } else {
            full = *external;
        }

        GpConfig gp = cfg.gp;
        gp.max_size = task.max_size;
        gp.seed = task.seed;

        EvolveOptions opts;
        opts.lm.max_iterations = cfg.search_iterations;
        opts.lm.tolerance = cfg.lm_tolerance;
        opts.threads = inner_threads;

        const ViewSet& search = full;
        ViewSet single;
        if (task.mode.kind == RunMode::Kind::kSingleView)
            single = sub_viewset(full, static_cast<std::size_t>(task.mode.view_index));
        EvolveResult evolved =
            evolve(gp, task.mode.kind == RunMode::Kind::kSingleView ? single : search,
                   cfg.aggregation, opts);

        LmOptions refit;
        refit.max_iterations = cfg.refit_iterations;
        refit.tolerance = cfg.lm_tolerance;
        double score = refit_score(evolved.best_model, full, refit);

        ResultRecord rec;
        rec.function = cfg.benchmark ? std::string(to_string(*cfg.benchmark)) : "external";
        rec.run_mode = task.mode.label();
        rec.noise = task.noise;
        rec.max_size = task.max_size;
        rec.seed = task.seed;
        rec.n_params = evolved.best_model.n_params();
        rec.refit_mse = score;
        rec.expression = format(evolved.best_model.skeleton);
        rec.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        records[t] = std::move(rec);
    });

    sort_records(records);
    return records;
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    static const std::vector<std::string> known = {
        "benchmark",      "csv_paths",   "noise",        "max_size",
        "population_size", "pool_size",  "crossover_probability", "mutation_probability",
        "max_depth",      "evaluation_budget", "operators", "constant_init",
        "aggregation",    "run_mode",    "view_index",   "seeds",
        "out_dir",        "param_bounds", "search_iterations", "refit_iterations",
        "lm_tolerance",   "jobs",        "view_thetas"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown config key '" + it.key() + "'");
    }

    ExperimentConfig cfg;
    try {
        if (j.contains("benchmark")) {
            auto name = j["benchmark"].get<std::string>();
            auto id = benchmark_from_string(name);
            if (!id) throw ConfigError("unknown benchmark '" + name + "'");
            cfg.benchmark = id;
        }
        read_field(j, "csv_paths", cfg.csv_paths);
        read_field(j, "noise", cfg.noise);
        read_field(j, "max_size", cfg.gp.max_size);
        read_field(j, "population_size", cfg.gp.population_size);
        read_field(j, "pool_size", cfg.gp.pool_size);
        read_field(j, "crossover_probability", cfg.gp.crossover_probability);
        read_field(j, "mutation_probability", cfg.gp.mutation_probability);
        read_field(j, "max_depth", cfg.gp.max_depth);
        read_field(j, "evaluation_budget", cfg.gp.evaluation_budget);
        if (j.contains("operators")) {
            cfg.gp.operators.clear();
            for (const auto& name : j["operators"])
                cfg.gp.operators.push_back(operator_from_name(name.get<std::string>()));
        }
        if (j.contains("constant_init")) {
            const auto& ci = j["constant_init"];
            auto kind = ci.value("kind", std::string("normal"));
            if (kind == "normal") cfg.gp.constant_init.kind = ConstantInit::Kind::kNormal;
            else if (kind == "uniform") cfg.gp.constant_init.kind = ConstantInit::Kind::kUniform;
            else throw ConfigError("constant_init.kind must be 'normal' or 'uniform'");
            cfg.gp.constant_init.a = ci.value("a", cfg.gp.constant_init.a);
            cfg.gp.constant_init.b = ci.value("b", cfg.gp.constant_init.b);
        }
        if (j.contains("aggregation")) {
            auto name = j["aggregation"].get<std::string>();
            auto kind = aggregation_from_string(name);
            if (!kind) throw ConfigError("unknown aggregation '" + name + "'");
            cfg.aggregation = *kind;
        }
        if (j.contains("run_mode")) {
            auto name = j["run_mode"].get<std::string>();
            if (name == "mvsr") cfg.run_mode.kind = RunMode::Kind::kMvsr;
            else if (name == "single_view") cfg.run_mode.kind = RunMode::Kind::kSingleView;
            else if (name == "all_single_views")
                cfg.run_mode.kind = RunMode::Kind::kAllSingleViews;
            else throw ConfigError("unknown run_mode '" + name + "'");
        }
        read_field(j, "view_index", cfg.run_mode.view_index);
        read_field(j, "seeds", cfg.seeds);
        read_field(j, "out_dir", cfg.out_dir);
        if (j.contains("param_bounds")) {
            const auto& b = j["param_bounds"];
            if (b.contains("lower")) cfg.param_bound_lower = b["lower"].get<int>();
            if (b.contains("upper")) cfg.param_bound_upper = b["upper"].get<int>();
        }
        read_field(j, "search_iterations", cfg.search_iterations);
        read_field(j, "refit_iterations", cfg.refit_iterations);
        read_field(j, "lm_tolerance", cfg.lm_tolerance);
        read_field(j, "jobs", cfg.jobs);
        if (j.contains("view_thetas")) {
            auto rows = j["view_thetas"].get<std::vector<std::vector<double>>>();
            if (rows.size() != 4) throw ConfigError("view_thetas must have 4 rows");
            ViewThetas vt{};
            for (std::size_t v = 0; v < 4; ++v) {
                if (rows[v].size() != 4) throw ConfigError("view_thetas rows must have 4 values");
                for (std::size_t c = 0; c < 4; ++c) vt[v][c] = rows[v][c];
            }
            cfg.view_thetas = vt;
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::size_t view_count(const ExperimentConfig& cfg) {
    return cfg.benchmark ? 4 : cfg.csv_paths.size();
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.benchmark && !cfg.csv_paths.empty())
        throw ConfigError("give either a benchmark or csv_paths, not both");
    if (!cfg.benchmark && cfg.csv_paths.empty())
        throw ConfigError("either a benchmark or csv_paths is required");
    if (!(cfg.noise >= 0.0 && cfg.noise < 1.0)) throw ConfigError("noise must lie in [0, 1)");
    if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
    if (cfg.gp.population_size < 2) throw ConfigError("population_size must be >= 2");
    if (cfg.gp.pool_size < 1) throw ConfigError("pool_size must be >= 1");
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(cfg.gp.crossover_probability))
        throw ConfigError("crossover_probability must lie in [0, 1]");
    if (!prob_ok(cfg.gp.mutation_probability))
        throw ConfigError("mutation_probability must lie in [0, 1]");
    if (cfg.gp.max_depth < 1) throw ConfigError("max_depth must be >= 1");
    if (cfg.gp.max_size < 1) throw ConfigError("max_size must be >= 1");
    if (cfg.gp.evaluation_budget < static_cast<std::size_t>(cfg.gp.population_size))
        throw ConfigError("evaluation_budget must be >= population_size");
    if (cfg.gp.operators.empty()) throw ConfigError("operator set must not be empty");
    if (cfg.gp.constant_init.kind == ConstantInit::Kind::kNormal && cfg.gp.constant_init.b < 0)
        throw ConfigError("constant_init stddev must be >= 0");
    if (cfg.run_mode.kind == RunMode::Kind::kSingleView &&
        (cfg.run_mode.view_index < 0 ||
         static_cast<std::size_t>(cfg.run_mode.view_index) >= view_count(cfg)))
        throw ConfigError("view_index out of range");
    if (cfg.param_bound_lower && cfg.param_bound_upper &&
        !(*cfg.param_bound_lower < *cfg.param_bound_upper))
        throw ConfigError("param_bounds.lower must be < param_bounds.upper");
    if (cfg.search_iterations < 1 || cfg.refit_iterations < 1)
        throw ConfigError("iteration counts must be >= 1");
    if (!(cfg.lm_tolerance > 0.0)) throw ConfigError("lm_tolerance must be > 0");
    if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    std::vector<Task> tasks;
    for (std::uint64_t seed : cfg.seeds)
        for (const RunMode& mode : expand_modes(cfg, view_count(cfg)))
            tasks.push_back(Task{cfg.noise, cfg.gp.max_size, seed, mode});
    return run_tasks(cfg, tasks);
}

std::vector<double> parse_noise_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        if (end > start) {
            std::string tok = text.substr(start, end - start);
            try {
                std::size_t used = 0;
                double v = std::stod(tok, &used);
                if (used != tok.size()) throw ConfigError("");
                out.push_back(v);
            } catch (const std::exception&) {
                throw ConfigError("bad noise rate '" + tok + "'");
            }
        }
        start = end + 1;
    }
    if (out.empty()) throw ConfigError("empty noise list");
    return out;
}

std::vector<int> parse_size_list(const std::string& text) {
    auto to_int = [](const std::string& tok) {
        try {
            std::size_t used = 0;
            int v = std::stoi(tok, &used);
            if (used != tok.size()) throw ConfigError("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("bad size '" + tok + "'");
        }
    };

    std::vector<int> out;
    if (text.find(':') != std::string::npos) {
        std::vector<int> nums;
        std::size_t start = 0;
        for (;;) {
            std::size_t end = text.find(':', start);
            nums.push_back(to_int(text.substr(
                start, end == std::string::npos ? std::string::npos : end - start)));
            if (end == std::string::npos) break;
            start = end + 1;
        }
        if (nums.size() != 3 || nums[2] <= 0 || nums[0] > nums[1])
            throw ConfigError("size range must be start:end:step");
        for (int s = nums[0]; s <= nums[1]; s += nums[2]) out.push_back(s);
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        if (end > start) out.push_back(to_int(text.substr(start, end - start)));
        start = end + 1;
    }
    if (out.empty()) throw ConfigError("empty size list");
    return out;
}

SweepResult sweep(const ExperimentConfig& base, std::span<const double> noises,
                  std::span<const int> sizes) {
    validate(base);
    if (noises.empty() || sizes.empty())
        throw ConfigError("sweep needs at least one noise rate and one size");
    for (double n : noises)
        if (!(n >= 0.0 && n < 1.0)) throw ConfigError("noise must lie in [0, 1)");
    for (int s : sizes)
        if (s < 1) throw ConfigError("max_size must be >= 1");

    std::vector<Task> tasks;
    for (double noise : noises)
        for (int size : sizes)
            for (std::uint64_t seed : base.seeds)
                for (const RunMode& mode : expand_modes(base, view_count(base)))
                    tasks.push_back(Task{noise, size, seed, mode});

    SweepResult out;
    out.records = run_tasks(base, tasks);
    out.heatmap = heatmap_grid(out.records);
    return out;
}

} // namespace mvsr
