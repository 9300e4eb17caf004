#include <doctest.h>

#include <cmath>

#include "mvsr/model.hpp"
#include "mvsr/num_io.hpp"
#include "test_support.hpp"

using namespace mvsr;

TEST_CASE("simplify: identities, folding, double negation") {
    CHECK(format(simplify(parse("x0*1.0 + 0.0"))) == "x0");
    CHECK(format(simplify(parse("(2.0+3.0)*x0"))) == "(5.0 * x0)");
    CHECK(format(simplify(parse("0.0 + x1"))) == "x1");
    CHECK(format(simplify(parse("x1 - 0.0"))) == "x1");
    CHECK(format(simplify(parse("x1 / 1.0"))) == "x1");
    CHECK(format(simplify(parse("-(-x1)"))) == "x1");
    CHECK(format(simplify(parse("-(2.0)"))) == "-2.0");

    Expression folded = simplify(parse("exp(1.5)*x0"));
    CHECK(folded.node(0).kind == NodeKind::kConstant);
    CHECK(folded.node(0).value == std::exp(1.5));
    CHECK(format(folded) == "(" + format_literal(std::exp(1.5)) + " * x0)");

    // non-finite folds stay symbolic so evaluation still reports them
    Expression division = simplify(parse("1.0 / 0.0"));
    CHECK(division.size() == 3);
    Expression root = simplify(parse("sqrt(0.0 - 2.0)"));
    CHECK(root.node(root.root()).kind == NodeKind::kSqrt);
}

TEST_CASE("simplify preserves semantics on random expressions") {
    Rng rng(777);
    int compared = 0;
    for (int i = 0; i < 500; ++i) {
        Expression e = testing::random_expression(rng, 20);
        Expression s = simplify(e);
        RowMatrix X = testing::random_inputs(rng, 6, 2);
        auto ye = evaluate(e, X);
        auto ys = evaluate(s, X);
        for (std::size_t r = 0; r < ye.size(); ++r) {
            if (!std::isfinite(ye[r]) || !std::isfinite(ys[r])) continue;
            double scale = std::max({std::fabs(ye[r]), std::fabs(ys[r]), 1.0});
            CHECK(std::fabs(ye[r] - ys[r]) <= 1e-12 * scale);
            ++compared;
        }
    }
    CHECK(compared > 500);
}

TEST_CASE("parameterize promotes constants left to right") {
    ParametricModel m = parameterize(parse("(5.0 * x0)"));
    CHECK(format(m.skeleton) == "(p0 * x0)");
    CHECK(m.n_params() == 1);
    CHECK(m.initial_guess[0] == 5.0);

    ParametricModel none = parameterize(parse("x0 + x1"));
    CHECK(none.n_params() == 0);
    CHECK(format(none.skeleton) == "(x0 + x1)");

    // the two-parameter family: the structural 1.0 stays literal
    ParametricModel fam = parameterize(parse("log(1.0/(0.1 + exp(-(2.0*x0))))"));
    CHECK(fam.n_params() == 2);
    CHECK(fam.initial_guess[0] == 0.1);
    CHECK(fam.initial_guess[1] == 2.0);
    CHECK(fam.skeleton.count(NodeKind::kConstant) == 1);
    CHECK(format(fam.skeleton) == "log((1.0 / (p0 + exp((-(p1 * x0))))))");
}

TEST_CASE("instantiate substitutes theta") {
    ParametricModel m = parameterize(parse("(5.0 * x0)"));
    std::vector<double> theta{2.0};
    CHECK(format(instantiate(m, theta)) == "(2.0 * x0)");

    ParametricModel none = parameterize(parse("x0 + x1"));
    CHECK(instantiate(none, {}) == none.skeleton);

    CHECK_THROWS_AS(instantiate(m, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    std::vector<double> bad{std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(instantiate(m, bad), std::invalid_argument);
}

TEST_CASE("parameterize/instantiate round trip equals simplify") {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        Expression e = testing::random_expression(rng, 18);
        Expression s = simplify(e);
        ParametricModel m = parameterize(e);
        CHECK(static_cast<std::size_t>(m.n_params()) <= e.count(NodeKind::kConstant));
        CHECK(instantiate(m, m.initial_guess) == s);
    }
}

TEST_CASE("skeleton_model validates parameter indices") {
    ParametricModel m = skeleton_model(parse("p0 + p1*x0"));
    CHECK(m.n_params() == 2);
    CHECK(m.initial_guess == std::vector<double>{1.0, 1.0});

    CHECK_THROWS_AS(skeleton_model(parse("p0 + p2*x0")), std::invalid_argument);
    CHECK_THROWS_AS(skeleton_model(parse("p0 + p0*x0")), std::invalid_argument);

    ParametricModel swapped = skeleton_model(parse("p1 + p0*x0"));
    std::vector<double> theta{3.0, 4.0};
    CHECK(format(instantiate(swapped, theta)) == "(4.0 + (3.0 * x0))");
}

TEST_CASE("InstantiatedModel rewrites theta in place") {
    ParametricModel m = parameterize(parse("1.5 + 2.5*x0"));
    InstantiatedModel inst(m, m.initial_guess);
    CHECK(format(inst.expression()) == "(1.5 + (2.5 * x0))");
    std::vector<double> theta{-1.0, 0.5};
    inst.set_theta(theta);
    CHECK(format(inst.expression()) == "(-1.0 + (0.5 * x0))");
    CHECK_THROWS_AS(inst.set_theta(std::vector<double>{1.0}), std::invalid_argument);
}
