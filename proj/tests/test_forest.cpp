#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "biasprobe/forest.hpp"
#include "biasprobe/rng.hpp"
#include "biasprobe/stats.hpp"

using namespace biasprobe;

namespace {

using XMat = std::vector<std::vector<double>>;

ForestParams small_params(std::uint64_t seed = 1) {
    ForestParams p;
    p.n_trees = 25;
    p.seed = seed;
    return p;
}

} // namespace

TEST_CASE("constant target is reproduced exactly") {
    XMat x = {{0.0}, {1.0}, {2.0}, {3.0}};
    std::vector<double> y(4, 7.5);
    auto f = RegressionForest::fit(x, y, small_params());
    for (const auto& row : x) CHECK(f.predict(row) == 7.5);
    CHECK(f.predict({100.0}) == 7.5);
}

TEST_CASE("two-point training without bootstrap builds the obvious stump") {
    XMat x = {{0.0}, {1.0}};
    std::vector<double> y = {0.0, 100.0};
    ForestParams p = small_params();
    p.bootstrap = false;
    p.n_trees = 1;
    auto f = RegressionForest::fit(x, y, p);

    // one root split at the midpoint 0.5 with pure leaves
    REQUIRE(f.trees().size() == 1);
    const auto& t = f.trees()[0];
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == 0.5);
    CHECK(f.predict({0.0}) == 0.0);
    CHECK(f.predict({1.0}) == 100.0);
    CHECK(f.predict({0.49}) == 0.0);
    CHECK(f.predict({0.51}) == 100.0);
}

TEST_CASE("serial and parallel training are bit-identical") {
    Rng rng(5);
    XMat x(120, std::vector<double>(6));
    std::vector<double> y(120);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (auto& v : x[i]) v = gaussian(rng);
        y[i] = 3.0 * x[i][0] - x[i][2] + 0.5 * gaussian(rng);
    }
    ForestParams serial = small_params(99);
    ForestParams parallel = serial;
    parallel.n_threads = 4;
    auto fs = RegressionForest::fit(x, y, serial);
    auto fp = RegressionForest::fit(x, y, parallel);
    CHECK(fs.to_json() == fp.to_json());
    for (const auto& row : x) CHECK(fs.predict(row) == fp.predict(row));
}

TEST_CASE("same seed reproduces the forest, a different seed does not") {
    Rng rng(6);
    XMat x(60, std::vector<double>(4));
    std::vector<double> y(60);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (auto& v : x[i]) v = gaussian(rng);
        y[i] = x[i][1] + gaussian(rng);
    }
    auto a = RegressionForest::fit(x, y, small_params(7));
    auto b = RegressionForest::fit(x, y, small_params(7));
    auto c = RegressionForest::fit(x, y, small_params(8));
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json() != c.to_json());
}

TEST_CASE("predictions stay inside the convex hull of the targets") {
    Rng rng(11);
    XMat x(80, std::vector<double>(3));
    std::vector<double> y(80);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (auto& v : x[i]) v = gaussian(rng);
        y[i] = 10.0 * gaussian(rng);
    }
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    auto f = RegressionForest::fit(x, y, small_params(3));
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> q = {gaussian(rng), gaussian(rng), gaussian(rng)};
        const double pred = f.predict(q);
        CHECK(pred >= *lo);
        CHECK(pred <= *hi);
    }
}

TEST_CASE("without bootstrap and distinct inputs the forest memorizes") {
    Rng rng(13);
    XMat x(40, std::vector<double>(5));
    std::vector<double> y(40);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (auto& v : x[i]) v = gaussian(rng);
        y[i] = 50.0 * gaussian(rng);
    }
    ForestParams p = small_params(17);
    p.bootstrap = false;
    auto f = RegressionForest::fit(x, y, p);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(f.predict(x[i]) == Catch::Approx(y[i]).margin(1e-9));
}

TEST_CASE("held-out correlation on a linear synthetic task") {
    Rng rng(19);
    const std::size_t n = 200, p_dim = 8;
    XMat x(n, std::vector<double>(p_dim));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x[i]) v = gaussian(rng);
        y[i] = 2.0 * x[i][0] + x[i][3] - 1.5 * x[i][5] + 0.3 * gaussian(rng);
    }
    XMat xtr(x.begin(), x.begin() + 150), xte(x.begin() + 150, x.end());
    std::vector<double> ytr(y.begin(), y.begin() + 150), yte(y.begin() + 150, y.end());
    ForestParams fp;
    fp.n_trees = 100;
    fp.seed = 23;
    fp.n_threads = 2;
    auto f = RegressionForest::fit(xtr, ytr, fp);
    CHECK(pearson(f.predict_all(xte), yte).rho >= 0.9);
}

TEST_CASE("validation rejects bad training data") {
    CHECK_THROWS_AS(RegressionForest::fit({{1.0}}, {1.0}, small_params()), EmptyData);
    CHECK_THROWS_AS(RegressionForest::fit({{1.0}, {2.0}}, {1.0}, small_params()),
                    DimensionMismatch);
    CHECK_THROWS_AS(RegressionForest::fit({{1.0}, {1.0, 2.0}}, {1.0, 2.0}, small_params()),
                    DimensionMismatch);
    const double nan = std::nan("");
    CHECK_THROWS_AS(RegressionForest::fit({{nan}, {1.0}}, {1.0, 2.0}, small_params()),
                    NonFiniteInput);
    CHECK_THROWS_AS(RegressionForest::fit({{0.0}, {1.0}}, {nan, 2.0}, small_params()),
                    NonFiniteInput);
    ForestParams bad = small_params();
    bad.n_trees = 0;
    CHECK_THROWS_AS(RegressionForest::fit({{0.0}, {1.0}}, {1.0, 2.0}, bad), InvariantViolation);
}

TEST_CASE("classifier separates a clean two-class problem") {
    Rng rng(29);
    XMat x;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        const int c = i & 1;
        x.push_back({(c ? 2.0 : -2.0) + 0.3 * gaussian(rng), gaussian(rng)});
        labels.push_back(c);
    }
    auto f = ClassForest::fit(x, labels, 2, small_params(31));
    int correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (f.predict_class(x[i]) == labels[i]) ++correct;
    CHECK(correct >= 98);
    CHECK(f.predict_class({-3.0, 0.0}) == 0);
    CHECK(f.predict_class({3.0, 0.0}) == 1);
}

TEST_CASE("classifier accepts a single-class training set") {
    XMat x = {{0.0}, {1.0}, {2.0}};
    std::vector<int> labels = {1, 1, 1};
    auto f = ClassForest::fit(x, labels, 2, small_params());
    CHECK(f.predict_class({5.0}) == 1);
}

TEST_CASE("classifier rejects out-of-range labels") {
    CHECK_THROWS_AS(ClassForest::fit({{0.0}, {1.0}}, {0, 2}, 2, small_params()),
                    InvariantViolation);
    CHECK_THROWS_AS(ClassForest::fit({{0.0}, {1.0}}, {0, 1}, 1, small_params()),
                    InvariantViolation);
}

TEST_CASE("json round-trip preserves predictions bit-exactly") {
    Rng rng(37);
    XMat x(50, std::vector<double>(4));
    std::vector<double> y(50);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (auto& v : x[i]) v = gaussian(rng);
        y[i] = x[i][0] * x[i][1] + gaussian(rng);
    }
    auto f = RegressionForest::fit(x, y, small_params(41));
    const std::string text = f.to_json().dump();
    auto g = RegressionForest::from_json(nlohmann::json::parse(text));
    for (const auto& row : x) CHECK(f.predict(row) == g.predict(row));
    CHECK(f.to_json() == g.to_json());

    std::vector<int> labels(50);
    for (std::size_t i = 0; i < 50; ++i) labels[i] = y[i] >= 0.0 ? 1 : 0;
    auto cf = ClassForest::fit(x, labels, 2, small_params(43));
    auto cg = ClassForest::from_json(nlohmann::json::parse(cf.to_json().dump()));
    for (const auto& row : x) CHECK(cf.predict_class(row) == cg.predict_class(row));
}

TEST_CASE("json loader rejects wrong version and wrong type") {
    auto f = RegressionForest::fit({{0.0}, {1.0}}, {0.0, 1.0}, small_params());
    auto j = f.to_json();
    auto bad = j;
    bad["format_version"] = 2;
    CHECK_THROWS_AS(RegressionForest::from_json(bad), ParseError);
    CHECK_THROWS_AS(ClassForest::from_json(j), ParseError);
}
