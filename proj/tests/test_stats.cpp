#include <catch_amalgamated.hpp>

#include <cmath>

#include "biasprobe/rng.hpp"
#include "biasprobe/stats.hpp"
#include "oracles.hpp"

using namespace biasprobe;

TEST_CASE("pearson perfect linearity") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x) y.push_back(2.0 * v + 1.0);
    auto r = pearson(x, y);
    CHECK(r.rho == Catch::Approx(1.0));
    CHECK(r.p_value == Catch::Approx(0.0).margin(1e-12));
    auto neg = pearson(x, std::vector<double>{-1, -2, -3, -4, -5});
    CHECK(neg.rho == Catch::Approx(-1.0));
}

TEST_CASE("pearson hand case rho = 0.8") {
    auto r = pearson({1, 2, 3, 4}, {1, 3, 2, 4});
    CHECK(r.rho == Catch::Approx(0.8));
    CHECK(r.n == 4);
    // oracle check of the p-value: t = 0.8*sqrt(2/0.36)
    const double t = 0.8 * std::sqrt(2.0 / (1.0 - 0.64));
    CHECK(r.p_value == Catch::Approx(oracle::student_t_two_sided(t, 2.0)).margin(1e-6));
}

TEST_CASE("pearson error paths") {
    CHECK_THROWS_AS(pearson({1, 2}, {3, 4}), TooFewSamples);
    CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), ZeroVariance);
    CHECK_THROWS_AS(pearson({1, 2, 3}, {1, 2}), LengthMismatch);
}

TEST_CASE("pearson invariances") {
    Rng rng(3);
    std::vector<double> x(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) {
        x[i] = gaussian(rng);
        y[i] = 0.6 * x[i] + 0.8 * gaussian(rng);
    }
    const double base = pearson(x, y).rho;
    std::vector<double> xs = x;
    for (auto& v : xs) v = 3.0 * v - 7.0;
    CHECK(pearson(xs, y).rho == Catch::Approx(base).margin(1e-12));
    for (auto& v : xs) v = -v;
    CHECK(pearson(xs, y).rho == Catch::Approx(-base).margin(1e-12));
}

TEST_CASE("p-value is monotone decreasing in |rho| at fixed n") {
    // construct vectors with controlled rho via mixing
    double prev_p = 1.1;
    for (double target : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double t = target * std::sqrt(18.0 / (1.0 - target * target));
        const double p = student_t_two_sided(t, 18.0);
        CHECK(p < prev_p);
        prev_p = p;
    }
}

TEST_CASE("rmse and explained variance") {
    SECTION("exact prediction") {
        CHECK(rmse({1, 2, 3}, {1, 2, 3}) == 0.0);
        CHECK(explained_variance({1, 2, 3}, {1, 2, 3}) == Catch::Approx(1.0));
    }
    SECTION("hand case sqrt(12.5)") {
        CHECK(rmse({0, 0}, {3, 4}) == Catch::Approx(std::sqrt(12.5)));
    }
    SECTION("constant predictor at the mean has EV 0") {
        CHECK(explained_variance({2, 2, 2}, {1, 2, 3}) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("length mismatch") {
        CHECK_THROWS_AS(rmse({1}, {1, 2}), LengthMismatch);
    }
}

TEST_CASE("chi2_proportion") {
    SECTION("exact null") {
        CHECK(chi2_proportion(50, 100, 0.5) == Catch::Approx(1.0));
    }
    SECTION("hand case chi2 = 4") {
        CHECK(chi2_proportion(60, 100, 0.5) == Catch::Approx(0.04550026).margin(1e-6));
    }
    SECTION("extreme tail bound") {
        CHECK(chi2_proportion(100, 100, 0.5) < 1e-22);
    }
    SECTION("symmetry at p0 = 0.5") {
        CHECK(chi2_proportion(37, 100, 0.5) == Catch::Approx(chi2_proportion(63, 100, 0.5)));
    }
    SECTION("invalid counts") {
        CHECK_THROWS_AS(chi2_proportion(5, 4), InvalidCounts);
        CHECK_THROWS_AS(chi2_proportion(0, 0), InvalidCounts);
    }
}

TEST_CASE("accuracy and confusion") {
    std::vector<int> truth = {1, 0, 1, 0};
    SECTION("identical labels") {
        CHECK(accuracy(truth, truth) == 1.0);
        auto c = confusion(truth, truth, 1);
        CHECK(c.fp == 0);
        CHECK(c.fn == 0);
        CHECK(c.tp == 2);
        CHECK(c.tn == 2);
    }
    SECTION("fully inverted labels") {
        std::vector<int> inv = {0, 1, 0, 1};
        CHECK(accuracy(inv, truth) == 0.0);
    }
    SECTION("balanced random labels hover near 0.5") {
        Rng rng(8);
        std::vector<int> a(1000), b(1000);
        for (std::size_t i = 0; i < 1000; ++i) {
            a[i] = static_cast<int>(rng() & 1u);
            b[i] = static_cast<int>(rng() & 1u);
        }
        const double acc = accuracy(a, b);
        CHECK(acc > 0.45);
        CHECK(acc < 0.55);
    }
}

TEST_CASE("tail functions agree with the quadrature oracle on a grid") {
    // Student-t two-sided over t and df
    for (double nu : {2.0, 5.0, 10.0, 30.0, 100.0}) {
        for (double t : {0.0, 0.5, 1.0, 2.0, 3.5, 6.0}) {
            CHECK(student_t_two_sided(t, nu) ==
                  Catch::Approx(oracle::student_t_two_sided(t, nu)).margin(1e-6));
        }
    }
    // chi-square upper tail over x and df
    for (double k : {1.0, 2.0, 4.0, 9.0}) {
        for (double x : {0.1, 0.5, 1.0, 2.0, 4.0, 10.0, 25.0}) {
            CHECK(chi_square_upper_tail(x, k) ==
                  Catch::Approx(oracle::chi2_upper_tail(x, k)).margin(1e-6));
        }
    }
}

TEST_CASE("incomplete beta and gamma sanity") {
    CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1,1) = x
    for (double x : {0.1, 0.25, 0.5, 0.9})
        CHECK(incomplete_beta(1.0, 1.0, x) == Catch::Approx(x).margin(1e-12));
    // P(1, x) = 1 - exp(-x)
    for (double x : {0.3, 1.0, 3.0})
        CHECK(incomplete_gamma_p(1.0, x) == Catch::Approx(1.0 - std::exp(-x)).margin(1e-12));
}
