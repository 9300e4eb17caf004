#include "mvsr/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mvsr/errors.hpp"
#include "mvsr/num_io.hpp"

namespace mvsr {
namespace {

constexpr double kPi = std::numbers::pi;

void check_noise(const NoiseSpec& spec) {
    if (!(spec.rate >= 0.0 && spec.rate < 1.0))
        throw std::invalid_argument("noise rate must lie in [0, 1)");
}

double eval_f1(const std::array<double, 4>& t, double x) {
    return t[0] + t[1] * x + t[2] * x * x + t[3] * x * x * x;
}

double eval_f2(const std::array<double, 4>& t, const double* x) {
    double d = x[2] - t[2];
    return std::sin(t[0] * x[0] * x[1]) + t[1] * d * d + t[3] * x[3] + x[4];
}

double eval_f3(const std::array<double, 4>& t, const double* x) {
    double inner = t[1] * x[1] * x[2] - t[2] / (t[3] * x[1] * x[3] + 1.0);
    return std::sqrt(t[0] * x[0] * x[0] + inner * inner);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t end = line.find(sep, start);
        if (end == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, end - start));
        start = end + 1;
    }
}

} // namespace

std::optional<BenchmarkId> benchmark_from_string(std::string_view name) {
    if (name == "f1_views") return BenchmarkId::kF1Views;
    if (name == "f1_partial") return BenchmarkId::kF1Partial;
    if (name == "f2_views") return BenchmarkId::kF2Views;
    if (name == "f3_views") return BenchmarkId::kF3Views;
    return std::nullopt;
}

std::string_view to_string(BenchmarkId id) {
    switch (id) {
        case BenchmarkId::kF1Views: return "f1_views";
        case BenchmarkId::kF1Partial: return "f1_partial";
        case BenchmarkId::kF2Views: return "f2_views";
        case BenchmarkId::kF3Views: return "f3_views";
    }
    return "?";
}

ViewThetas default_view_thetas(BenchmarkId id) {
    switch (id) {
        case BenchmarkId::kF1Views:
            return {{{2, 2, 0, 0}, {0, 2, 2, 0}, {0, 0, 2, 2}, {2, 0, 0, 2}}};
        case BenchmarkId::kF1Partial:
            return {{{2, -2, 2, 2}, {2, -2, 2, 2}, {2, -2, 2, 2}, {2, -2, 2, 2}}};
        case BenchmarkId::kF2Views: {
            // Classical constants (pi, 20, 0.5, 10) with the rotating
            // two-zeros pattern of the f1 views.
            const std::array<double, 4> base{kPi, 20.0, 0.5, 10.0};
            ViewThetas t{};
            for (int v = 0; v < 4; ++v)
                for (int j = 0; j < 4; ++j)
                    t[v][j] = (j == v || j == (v + 1) % 4) ? base[j] : 0.0;
            return t;
        }
        case BenchmarkId::kF3Views: {
            ViewThetas t{};
            for (int v = 0; v < 4; ++v)
                for (int j = 0; j < 4; ++j) t[v][j] = (j == v || j == (v + 1) % 4) ? 1.0 : 0.0;
            return t;
        }
    }
    return {};
}

int true_param_count(BenchmarkId id) {
    switch (id) {
        case BenchmarkId::kF1Views:
        case BenchmarkId::kF1Partial:
            return 4;
        case BenchmarkId::kF2Views:
        case BenchmarkId::kF3Views:
            // Target scaling is an extra multiplicative degree of freedom
            // that the polynomial absorbs but these forms do not.
            return 5;
    }
    return -1;
}

ParametricModel true_model(BenchmarkId id) {
    switch (id) {
        case BenchmarkId::kF1Views:
        case BenchmarkId::kF1Partial:
            return skeleton_model(parse("p0 + p1*x0 + p2*square(x0) + p3*(x0*square(x0))"));
        case BenchmarkId::kF2Views:
            return skeleton_model(
                parse("p4 * (sin(p0*(x0*x1)) + p1*square(x2 - p2) + p3*x3 + x4)"));
        case BenchmarkId::kF3Views:
            return skeleton_model(parse(
                "p4 * sqrt(p0*square(x0) + square(p1*(x1*x2) - p2/(p3*(x1*x3) + 1.0)))"));
    }
    throw std::invalid_argument("unknown benchmark");
}

std::vector<double> add_noise(std::span<const double> y, const NoiseSpec& spec, Rng& rng) {
    check_noise(spec);
    std::vector<double> out(y.begin(), y.end());
    if (spec.rate == 0.0) return out;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); }))
        return out;  // sigma_y is exactly zero

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size());
    double sigma = std::sqrt(var) * std::sqrt(spec.rate / (1.0 - spec.rate));

    for (double& v : out) v += sigma * rng.normal();
    return out;
}

std::vector<double> scale_target(std::span<const double> y) {
    double peak = 0.0;
    for (double v : y) peak = std::max(peak, std::fabs(v));
    if (peak == 0.0) throw std::domain_error("cannot scale an all-zero target");
    std::vector<double> out(y.begin(), y.end());
    for (double& v : out) v = 10.0 * v / peak;
    return out;
}

ViewSet generate_benchmark(BenchmarkId id, const NoiseSpec& noise, std::uint64_t seed) {
    return generate_benchmark(id, noise, seed, default_view_thetas(id));
}

ViewSet generate_benchmark(BenchmarkId id, const NoiseSpec& noise, std::uint64_t seed,
                           const ViewThetas& thetas) {
    check_noise(noise);
    ViewSet vs;
    vs.provenance.generator = std::string(to_string(id));
    vs.provenance.noise_rate = noise.rate;
    vs.provenance.seed = seed;
    vs.provenance.true_n_params = true_param_count(id);

    for (std::size_t view = 0; view < 4; ++view) {
        std::uint64_t view_seed = mix_seed(seed, view);
        Rng rng_x(mix_seed(view_seed, 1));
        Rng rng_noise(mix_seed(mix_seed(view_seed, 2), noise.seed));
        const auto& theta = thetas[view];

        Dataset d;
        d.label = "view_" + std::to_string(view);
        std::vector<double> raw;

        switch (id) {
            case BenchmarkId::kF1Views:
            case BenchmarkId::kF1Partial: {
                double lo = -2.0, hi = 2.0;
                if (id == BenchmarkId::kF1Partial) {
                    lo = -2.0 + static_cast<double>(view);
                    hi = lo + 1.0;
                }
                auto xs = linspace(lo, hi, 20);
                d.X = RowMatrix(xs.size(), 1);
                raw.resize(xs.size());
                for (std::size_t r = 0; r < xs.size(); ++r) {
                    d.X(r, 0) = xs[r];
                    raw[r] = eval_f1(theta, xs[r]);
                }
                break;
            }
            case BenchmarkId::kF2Views: {
                d.X = RowMatrix(100, 5);
                raw.resize(100);
                for (std::size_t r = 0; r < 100; ++r) {
                    for (std::size_t c = 0; c < 5; ++c) d.X(r, c) = rng_x.uniform();
                    raw[r] = eval_f2(theta, &d.X.data[r * 5]);
                }
                break;
            }
            case BenchmarkId::kF3Views: {
                d.X = RowMatrix(100, 4);
                raw.resize(100);
                for (std::size_t r = 0; r < 100; ++r) {
                    d.X(r, 0) = rng_x.uniform(0.0, 100.0);
                    d.X(r, 1) = rng_x.uniform(40.0 * kPi, 560.0 * kPi);
                    d.X(r, 2) = rng_x.uniform();
                    d.X(r, 3) = rng_x.uniform(1.0, 11.0);
                    raw[r] = eval_f3(theta, &d.X.data[r * 4]);
                }
                break;
            }
        }

        vs.provenance.noiseless_y.push_back(scale_target(raw));
        vs.provenance.true_thetas.emplace_back(theta.begin(), theta.end());
        d.y = scale_target(add_noise(raw, noise, rng_noise));
        vs.views.push_back(std::move(d));
    }
    return vs;
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw IoError("'" + path.string() + "' is empty");

    auto header = split(lines[0], ',');
    int y_col = -1;
    std::size_t x_seen = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "y") {
            if (y_col >= 0) throw IoError("'" + path.string() + "': duplicate y column");
            y_col = static_cast<int>(c);
        } else if (header[c] == "x" + std::to_string(x_seen)) {
            ++x_seen;
        } else {
            throw IoError("'" + path.string() + "': unexpected column '" + header[c] +
                          "' (want x0..x{m-1}, y)");
        }
    }
    if (y_col < 0) throw IoError("'" + path.string() + "': missing y column");
    if (x_seen == 0) throw IoError("'" + path.string() + "': no feature columns");
    if (lines.size() < 2) throw IoError("'" + path.string() + "': no data rows");

    Dataset d;
    d.label = path.stem().string();
    d.X = RowMatrix(lines.size() - 1, x_seen);
    d.y.resize(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        auto cells = split(lines[r], ',');
        if (cells.size() != header.size())
            throw IoError("'" + path.string() + "': row " + std::to_string(r + 1) +
                          " has " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(header.size()));
        std::size_t xi = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            auto v = parse_double(cells[c]);
            if (!v || !std::isfinite(*v))
                throw IoError("'" + path.string() + "': non-numeric cell '" + cells[c] +
                              "' at row " + std::to_string(r + 1));
            if (static_cast<int>(c) == y_col)
                d.y[r - 1] = *v;
            else
                d.X(r - 1, xi++) = *v;
        }
    }
    return d;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < data.dim(); ++c) out << 'x' << c << ',';
    out << "y\n";
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.dim(); ++c) out << format_double(data.X(r, c)) << ',';
        out << format_double(data.y[r]) << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ViewSet viewset_from_csv(std::span<const std::string> paths) {
    if (paths.empty()) throw ConfigError("at least one view is required");
    ViewSet vs;
    vs.provenance.generator = "external";
    for (const auto& p : paths) {
        Dataset d = load_csv(p);
        if (!vs.views.empty() && d.dim() != vs.dim())
            throw IoError("'" + p + "': dimensionality " + std::to_string(d.dim()) +
                          " does not match previous views (" + std::to_string(vs.dim()) + ")");
        // External data doubles as its own reference target.
        vs.provenance.noiseless_y.push_back(d.y);
        vs.views.push_back(std::move(d));
    }
    return vs;
}

ViewSet sub_viewset(const ViewSet& vs, std::size_t view_index) {
    if (view_index >= vs.k()) throw std::out_of_range("view index out of range");
    ViewSet out;
    out.views.push_back(vs.views[view_index]);
    out.provenance.generator = vs.provenance.generator;
    out.provenance.noise_rate = vs.provenance.noise_rate;
    out.provenance.seed = vs.provenance.seed;
    out.provenance.true_n_params = vs.provenance.true_n_params;
    if (view_index < vs.provenance.true_thetas.size())
        out.provenance.true_thetas.push_back(vs.provenance.true_thetas[view_index]);
    if (view_index < vs.provenance.noiseless_y.size())
        out.provenance.noiseless_y.push_back(vs.provenance.noiseless_y[view_index]);
    return out;
}

} // namespace mvsr
