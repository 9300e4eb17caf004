#include <doctest.h>

#include <cmath>

#include "mvsr/mveval.hpp"
#include "test_support.hpp"

using namespace mvsr;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("aggregate: statistics and the infinity policy") {
    std::vector<double> v{1.0, 2.0, 3.0};
    CHECK(aggregate(v, AggregationKind::kMax) == 3.0);
    CHECK(aggregate(v, AggregationKind::kMin) == 1.0);
    CHECK(aggregate(v, AggregationKind::kAverage) == 2.0);
    CHECK(aggregate(v, AggregationKind::kMedian) == 2.0);
    CHECK(std::fabs(aggregate(v, AggregationKind::kHarmonicMean) - 18.0 / 11.0) <= 1e-15);

    std::vector<double> four{4.0, 1.0, 3.0, 2.0};
    CHECK(aggregate(four, AggregationKind::kMedian) == 2.5);

    std::vector<double> with_nan{1.0, std::numeric_limits<double>::quiet_NaN()};
    std::vector<double> with_inf{1.0, kInf};
    for (auto kind : {AggregationKind::kMax, AggregationKind::kAverage, AggregationKind::kMedian,
                      AggregationKind::kMin, AggregationKind::kHarmonicMean}) {
        CHECK(aggregate(with_nan, kind) == kInf);
        CHECK(aggregate(with_inf, kind) == kInf);
    }

    CHECK_THROWS_AS(aggregate(std::vector<double>{}, AggregationKind::kMax),
                    std::invalid_argument);
}

TEST_CASE("an exact skeleton scores ~0 on all noiseless views") {
    ViewSet views = generate_benchmark(BenchmarkId::kF1Views, {0.0, 0}, 5);
    Expression cubic = parse("0.5 + 0.5*x0 + 0.5*square(x0) + 0.5*(x0*square(x0))");
    auto result = evaluate_multiview(cubic, views, AggregationKind::kMax);
    CHECK(result.score.aggregated < 1e-12);
    CHECK(result.score.per_view.size() == 4);
    CHECK(result.model.n_params() == 4);
}

TEST_CASE("identical views aggregate to the single-view loss for every kind") {
    ViewSet one_slope = testing::linear_views({1.7, 1.7, 1.7});
    Expression e = parse("0.3*x0 + 0.1");
    double reference =
        evaluate_multiview(e, sub_viewset(one_slope, 0), AggregationKind::kMax).score.aggregated;
    for (auto kind : {AggregationKind::kMax, AggregationKind::kAverage, AggregationKind::kMedian,
                      AggregationKind::kMin, AggregationKind::kHarmonicMean}) {
        auto r = evaluate_multiview(e, one_slope, kind);
        CHECK(r.score.aggregated == doctest::Approx(reference).epsilon(1e-12));
    }
}

TEST_CASE("permuting views leaves the aggregate unchanged") {
    ViewSet vs = testing::linear_views({2.0, -3.0, 0.5});
    ViewSet reversed;
    reversed.provenance = vs.provenance;
    std::reverse(reversed.provenance.noiseless_y.begin(), reversed.provenance.noiseless_y.end());
    for (auto it = vs.views.rbegin(); it != vs.views.rend(); ++it) reversed.views.push_back(*it);

    Expression e = parse("1.2*x0");
    for (auto kind : {AggregationKind::kMax, AggregationKind::kAverage, AggregationKind::kMin}) {
        double a = evaluate_multiview(e, vs, kind).score.aggregated;
        double b = evaluate_multiview(e, reversed, kind).score.aggregated;
        CHECK(a == doctest::Approx(b).epsilon(1e-14));
    }
}

TEST_CASE("a view where the expression is non-finite forces +inf") {
    // sqrt over a negative-spanning view: no parameters, the raw mse is NaN
    ViewSet vs = testing::linear_views({1.0, 1.0});
    for (auto& row : vs.views[0].X.data) row = -std::fabs(row) - 0.5;
    Expression e = parse("sqrt(x0)");
    auto r = evaluate_multiview(e, vs, AggregationKind::kMax);
    CHECK(r.score.aggregated == kInf);
    auto ravg = evaluate_multiview(e, vs, AggregationKind::kAverage);
    CHECK(ravg.score.aggregated == kInf);
}

TEST_CASE("the last view's theta becomes the reported initial guess") {
    ViewSet vs = testing::linear_views({2.0, -3.0});
    auto r = evaluate_multiview(parse("0.5 * x0"), vs, AggregationKind::kMax);
    REQUIRE(r.model.n_params() == 1);
    CHECK(r.model.initial_guess[0] == r.score.per_view.back().theta[0]);
    CHECK(r.model.initial_guess[0] == doctest::Approx(-3.0).epsilon(1e-8));
    CHECK(r.score.per_view.front().theta[0] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("dimension mismatch is rejected") {
    ViewSet vs = testing::linear_views({1.0});
    CHECK_THROWS_AS(evaluate_multiview(parse("x3"), vs, AggregationKind::kMax),
                    std::invalid_argument);
}
