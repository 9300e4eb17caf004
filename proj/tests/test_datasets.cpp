#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mvsr/datasets.hpp"
#include "mvsr/errors.hpp"
#include "test_support.hpp"

using namespace mvsr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "mvsr_test_datasets";
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

} // namespace

TEST_CASE("f1 views: spacing, parameters, scaling") {
    ViewSet vs = generate_benchmark(BenchmarkId::kF1Views, {0.0, 0}, 42);
    REQUIRE(vs.k() == 4);
    CHECK(vs.dim() == 1);
    for (const auto& v : vs.views) CHECK(v.rows() == 20);

    const Dataset& v1 = vs.views[0];
    CHECK(v1.X(0, 0) == -2.0);
    CHECK(v1.X(19, 0) == 2.0);

    // view 1 has theta = (2, 2, 0, 0): pre-scaling y at x = -2 is -2,
    // max |y| over the grid is 6, so the stored target is 10 * (-2) / 6.
    CHECK(v1.y[0] == doctest::Approx(10.0 * -2.0 / 6.0).epsilon(1e-15));
    CHECK(vs.provenance.true_thetas[0] == std::vector<double>{2, 2, 0, 0});
    CHECK(vs.provenance.true_thetas[1] == std::vector<double>{0, 2, 2, 0});
    CHECK(vs.provenance.true_thetas[2] == std::vector<double>{0, 0, 2, 2});
    CHECK(vs.provenance.true_thetas[3] == std::vector<double>{2, 0, 0, 2});

    // noiseless targets equal the view targets at tau = 0
    for (std::size_t v = 0; v < 4; ++v) CHECK(vs.views[v].y == vs.provenance.noiseless_y[v]);
}

TEST_CASE("f1 partial: four unit domains, shared parameters") {
    ViewSet vs = generate_benchmark(BenchmarkId::kF1Partial, {0.0, 0}, 7);
    REQUIRE(vs.k() == 4);
    for (int v = 0; v < 4; ++v) {
        CHECK(vs.views[v].rows() == 20);
        CHECK(vs.views[v].X(0, 0) == doctest::Approx(-2.0 + v).epsilon(1e-15));
        CHECK(vs.views[v].X(19, 0) == doctest::Approx(-1.0 + v).epsilon(1e-15));
        CHECK(vs.provenance.true_thetas[v] == std::vector<double>{2, -2, 2, 2});
    }
}

TEST_CASE("f2/f3 views: shape and sampling domains") {
    ViewSet f2 = generate_benchmark(BenchmarkId::kF2Views, {0.0, 0}, 3);
    REQUIRE(f2.k() == 4);
    CHECK(f2.dim() == 5);
    for (const auto& v : f2.views) {
        CHECK(v.rows() == 100);
        for (double x : v.X.data) {
            CHECK(x >= 0.0);
            CHECK(x < 1.0);
        }
    }

    ViewSet f3 = generate_benchmark(BenchmarkId::kF3Views, {0.0, 0}, 3);
    CHECK(f3.dim() == 4);
    for (const auto& v : f3.views) {
        for (std::size_t r = 0; r < v.rows(); ++r) {
            CHECK(v.X(r, 0) <= 100.0);
            CHECK(v.X(r, 1) >= 40.0 * 3.14159);
            CHECK(v.X(r, 1) <= 560.0 * 3.1416);
            CHECK(v.X(r, 3) >= 1.0);
            CHECK(v.X(r, 3) <= 11.0);
        }
    }
}

TEST_CASE("generator matches its own parametric skeleton") {
    for (BenchmarkId id : {BenchmarkId::kF1Views, BenchmarkId::kF1Partial,
                           BenchmarkId::kF2Views, BenchmarkId::kF3Views}) {
        ViewSet vs = generate_benchmark(id, {0.0, 0}, 11);
        ParametricModel truth = true_model(id);
        for (std::size_t v = 0; v < vs.k(); ++v) {
            // f2/f3 carry the target scaling as an explicit fifth parameter
            std::vector<double> theta = vs.provenance.true_thetas[v];
            if (truth.n_params() == 5) theta.push_back(1.0);
            auto raw = evaluate(instantiate(truth, theta), vs.views[v].X);
            double peak = 0.0;
            for (double y : raw) peak = std::max(peak, std::fabs(y));
            const auto& stored = vs.provenance.noiseless_y[v];
            for (std::size_t r = 0; r < raw.size(); ++r) {
                double expected = 10.0 * raw[r] / peak;
                double scale = std::max(1.0, std::fabs(stored[r]));
                CHECK(std::fabs(expected - stored[r]) <= 1e-9 * scale);
            }
        }
    }
}

TEST_CASE("generation is bitwise deterministic") {
    for (double tau : {0.0, 0.1}) {
        ViewSet a = generate_benchmark(BenchmarkId::kF2Views, {tau, 0}, 99);
        ViewSet b = generate_benchmark(BenchmarkId::kF2Views, {tau, 0}, 99);
        for (std::size_t v = 0; v < a.k(); ++v) {
            CHECK(std::memcmp(a.views[v].X.data.data(), b.views[v].X.data.data(),
                              a.views[v].X.data.size() * 8) == 0);
            CHECK(std::memcmp(a.views[v].y.data(), b.views[v].y.data(),
                              a.views[v].y.size() * 8) == 0);
        }
    }
}

TEST_CASE("add_noise: identity at tau 0, correct spread at tau 0.1") {
    std::vector<double> y{1.0, 2.0, 3.0, 4.0, 5.0};
    Rng rng(1);
    CHECK(add_noise(y, {0.0, 0}, rng) == y);

    std::vector<double> flat(10, 4.2);
    CHECK(add_noise(flat, {0.5, 0}, rng) == flat);  // zero variance

    // 10,000 draws: empirical std within 3% of sigma_y / 3
    std::vector<double> base(100);
    Rng rng_base(5);
    for (double& v : base) v = rng_base.uniform(-3.0, 3.0);
    double mean = 0.0;
    for (double v : base) mean += v;
    mean /= base.size();
    double var = 0.0;
    for (double v : base) var += (v - mean) * (v - mean);
    var /= base.size();
    double sigma = std::sqrt(var);

    Rng rng_noise(17);
    double acc = 0.0;
    std::size_t count = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto noisy = add_noise(base, {0.1, 0}, rng_noise);
        for (std::size_t i = 0; i < base.size(); ++i) {
            double d = noisy[i] - base[i];
            acc += d * d;
            ++count;
        }
    }
    double empirical = std::sqrt(acc / count);
    double expected = sigma / 3.0;
    CHECK(std::fabs(empirical - expected) <= 0.03 * expected);

    CHECK_THROWS_AS(add_noise(y, {1.0, 0}, rng), std::invalid_argument);
}

TEST_CASE("scale_target") {
    CHECK(scale_target(std::vector<double>{1, -5, 2}) == std::vector<double>{2, -10, 4});
    CHECK(scale_target(std::vector<double>{10}) == std::vector<double>{10});
    CHECK_THROWS_AS(scale_target(std::vector<double>{0, 0}), std::domain_error);

    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> y(1 + rng.uniform_index(50));
        for (double& v : y) v = rng.uniform(-100.0, 100.0);
        auto scaled = scale_target(y);
        double peak = 0.0;
        for (double v : scaled) peak = std::max(peak, std::fabs(v));
        CHECK(std::fabs(peak - 10.0) <= std::ldexp(10.0, -52));
    }
}

TEST_CASE("load_csv happy paths") {
    auto dir = temp_dir();
    write_text(dir / "one.csv", "x0,y\n1,2\n3,4\n");
    Dataset a = load_csv(dir / "one.csv");
    CHECK(a.rows() == 2);
    CHECK(a.dim() == 1);
    CHECK(a.X(1, 0) == 3.0);
    CHECK(a.y[1] == 4.0);

    write_text(dir / "two.csv", "x0,x1,y\n1,2,3\n");
    Dataset b = load_csv(dir / "two.csv");
    CHECK(b.dim() == 2);

    // write/load round trip is bitwise
    Rng rng(3);
    Dataset d;
    d.X = testing::random_inputs(rng, 7, 3, -5, 5);
    d.y.resize(7);
    for (double& v : d.y) v = rng.normal();
    write_csv(d, dir / "rt.csv");
    Dataset back = load_csv(dir / "rt.csv");
    CHECK(std::memcmp(back.X.data.data(), d.X.data.data(), d.X.data.size() * 8) == 0);
    CHECK(std::memcmp(back.y.data(), d.y.data(), d.y.size() * 8) == 0);
}

TEST_CASE("load_csv rejects malformed input") {
    auto dir = temp_dir();
    write_text(dir / "noy.csv", "x0,x1\n1,2\n");
    CHECK_THROWS_AS(load_csv(dir / "noy.csv"), IoError);

    write_text(dir / "ragged.csv", "x0,y\n1,2\n3\n");
    CHECK_THROWS_AS(load_csv(dir / "ragged.csv"), IoError);

    write_text(dir / "empty.csv", "");
    CHECK_THROWS_AS(load_csv(dir / "empty.csv"), IoError);

    write_text(dir / "headeronly.csv", "x0,y\n");
    CHECK_THROWS_AS(load_csv(dir / "headeronly.csv"), IoError);

    write_text(dir / "text.csv", "x0,y\n1,foo\n");
    CHECK_THROWS_AS(load_csv(dir / "text.csv"), IoError);

    write_text(dir / "order.csv", "x1,x0,y\n1,2,3\n");
    CHECK_THROWS_AS(load_csv(dir / "order.csv"), IoError);

    CHECK_THROWS_AS(load_csv(dir / "missing_file.csv"), IoError);
}

TEST_CASE("sub_viewset keeps provenance aligned") {
    ViewSet vs = generate_benchmark(BenchmarkId::kF1Views, {0.0, 0}, 2);
    ViewSet one = sub_viewset(vs, 2);
    REQUIRE(one.k() == 1);
    CHECK(one.views[0].y == vs.views[2].y);
    CHECK(one.provenance.noiseless_y[0] == vs.provenance.noiseless_y[2]);
    CHECK(one.provenance.true_thetas[0] == vs.provenance.true_thetas[2]);
    CHECK_THROWS_AS(sub_viewset(vs, 9), std::out_of_range);
}
