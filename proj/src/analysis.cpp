#include "mvsr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "mvsr/errors.hpp"
#include "mvsr/num_io.hpp"

namespace mvsr {

double refit_score(const ParametricModel& model, const ViewSet& views, const LmOptions& opts) {
    if (views.provenance.noiseless_y.size() != views.k())
        throw std::invalid_argument("view set has no noiseless targets to refit against");

    double acc = 0.0;
    for (std::size_t i = 0; i < views.k(); ++i) {
        Dataset reference;
        reference.X = views.views[i].X;
        reference.y = views.provenance.noiseless_y[i];
        reference.label = views.views[i].label;
        FitResult fit = lm_fit(model, reference, model.initial_guess, opts);
        if (!fit.finite || !std::isfinite(fit.loss))
            return std::numeric_limits<double>::infinity();
        acc += fit.loss;
    }
    return acc / static_cast<double>(views.k());
}

std::vector<HeatmapCell> heatmap_grid(std::span<const ResultRecord> records) {
    std::map<std::tuple<std::string, double, int>, std::pair<double, int>> cells;
    for (const auto& r : records) {
        double clipped = std::isfinite(r.refit_mse) ? std::min(r.refit_mse, 5.0) : 5.0;
        auto& cell = cells[{r.run_mode, r.noise, r.max_size}];
        cell.first += clipped;
        cell.second += 1;
    }
    std::vector<HeatmapCell> out;
    out.reserve(cells.size());
    for (const auto& [key, agg] : cells) {
        out.push_back(HeatmapCell{std::get<0>(key), std::get<1>(key), std::get<2>(key),
                                  agg.first / agg.second, agg.second});
    }
    return out;
}

RankTable average_ranks(const std::vector<std::string>& methods,
                        const std::vector<std::vector<double>>& deltas) {
    const std::size_t k = methods.size();
    if (k < 2 || deltas.size() != k) throw std::invalid_argument("need at least two methods");
    const std::size_t n = deltas.front().size();
    if (n < 2) throw std::invalid_argument("need at least two instances");
    for (const auto& row : deltas)
        if (row.size() != n) throw std::invalid_argument("ragged delta matrix");

    RankTable table;
    table.methods = methods;
    table.deltas = deltas;
    table.n_instances = n;
    table.average_rank.assign(k, 0.0);

    std::vector<std::size_t> order(k);
    for (std::size_t inst = 0; inst < n; ++inst) {
        for (std::size_t m = 0; m < k; ++m) order[m] = m;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return deltas[a][inst] < deltas[b][inst];
        });
        // Mid-rank convention for ties.
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j + 1 < k && deltas[order[j + 1]][inst] == deltas[order[i]][inst]) ++j;
            double rank = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t t = i; t <= j; ++t) table.average_rank[order[t]] += rank;
            i = j + 1;
        }
    }
    for (double& r : table.average_rank) r /= static_cast<double>(n);

    double sum_sq = 0.0;
    for (double r : table.average_rank) sum_sq += r * r;
    double nd = static_cast<double>(n);
    double kd = static_cast<double>(k);
    table.friedman_chi2 = 12.0 * nd / (kd * (kd + 1.0)) * sum_sq - 3.0 * nd * (kd + 1.0);
    return table;
}

void sort_records(std::vector<ResultRecord>& records) {
    std::sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
        return std::tie(a.function, a.run_mode, a.noise, a.max_size, a.seed) <
               std::tie(b.function, b.run_mode, b.noise, b.max_size, b.seed);
    });
}

namespace {

// The expression column may contain commas (pow calls); standard CSV quoting
// is applied to it when needed.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
}

} // namespace

void write_results_csv(const std::filesystem::path& path, std::span<const ResultRecord> records) {
    std::ostringstream out;
    out << "function,run_mode,noise,max_size,seed,n_params,refit_mse,expression\n";
    for (const auto& r : records) {
        out << r.function << ',' << r.run_mode << ',' << format_double(r.noise) << ','
            << r.max_size << ',' << r.seed << ',' << r.n_params << ','
            << format_double(r.refit_mse) << ',' << csv_field(r.expression) << '\n';
    }
    atomic_write(path, out.str());
}

std::vector<ResultRecord> read_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("'" + path.string() + "' is empty");

    std::vector<ResultRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 8)
            throw IoError("'" + path.string() + "': line " + std::to_string(line_no) +
                          " has " + std::to_string(f.size()) + " fields, expected 8");
        ResultRecord r;
        r.function = f[0];
        r.run_mode = f[1];
        auto noise = parse_double(f[2]);
        auto mse = parse_double(f[6]);
        try {
            r.max_size = std::stoi(f[3]);
            r.seed = std::stoull(f[4]);
            r.n_params = std::stoi(f[5]);
        } catch (const std::exception&) {
            noise.reset();
        }
        if (!noise || !mse)
            throw IoError("'" + path.string() + "': bad numeric field at line " +
                          std::to_string(line_no));
        r.noise = *noise;
        r.refit_mse = *mse;
        r.expression = f[7];
        records.push_back(std::move(r));
    }
    return records;
}

void write_heatmap_csv(const std::filesystem::path& path, std::span<const HeatmapCell> cells) {
    std::ostringstream out;
    out << "run_mode,noise,max_size,mean_clipped_mse,count\n";
    for (const auto& c : cells) {
        out << c.run_mode << ',' << format_double(c.noise) << ',' << c.max_size << ','
            << format_double(c.mean_clipped_mse) << ',' << c.count << '\n';
    }
    atomic_write(path, out.str());
}

} // namespace mvsr
