#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <set>

#include "biasprobe/shape_model.hpp"

using namespace biasprobe;

namespace {

ShapeVector sv(std::string id, Vec c) { return {std::move(id), std::move(c)}; }

} // namespace

TEST_CASE("fit_trait_vector identity case") {
    auto tv = fit_trait_vector({sv("a", {1, 0, 0})}, {1.0}, TraitDimension::Trustworthy);
    CHECK(tv.direction == Vec{1, 0, 0});
    CHECK(tv.raw_norm == Catch::Approx(1.0));
}

TEST_CASE("fit_trait_vector matches hand matrix-vector product") {
    // t = F*r with columns (1,0,0), (0,1,0) and scores (2,1) -> (2,1,0)
    auto tv = fit_trait_vector({sv("a", {1, 0, 0}), sv("b", {0, 1, 0})}, {2.0, 1.0},
                               TraitDimension::Dominant);
    const double s5 = std::sqrt(5.0);
    CHECK(tv.raw_norm == Catch::Approx(s5));
    CHECK(tv.direction[0] == Catch::Approx(2.0 / s5));
    CHECK(tv.direction[1] == Catch::Approx(1.0 / s5));
    CHECK(tv.direction[2] == Catch::Approx(0.0));
}

TEST_CASE("fit_trait_vector error paths") {
    CHECK_THROWS_AS(fit_trait_vector({sv("a", {1.0, 2.0})}, {0.0}, TraitDimension::Likeable),
                    DegenerateRatings);
    CHECK_THROWS_AS(fit_trait_vector({sv("a", {1.0})}, {1.0, 2.0}, TraitDimension::Likeable),
                    DimensionMismatch);
}

TEST_CASE("manipulate") {
    TraitVector tv{TraitDimension::Trustworthy, {1, 0, 0}, 1.0};
    ShapeVector base = sv("b0", {0, 0, 0});

    SECTION("delta 0 is the identity") {
        auto m = manipulate(base, tv, 0.0);
        CHECK(m.shape.coeffs == base.coeffs);
        CHECK(m.delta == 0.0);
    }
    SECTION("forced by the formula") {
        auto m = manipulate(base, tv, 2.0);
        CHECK(m.shape.coeffs == Vec{2, 0, 0});
        CHECK(m.base_id == "b0");
    }
    SECTION("delta range -3..3 supported") {
        for (double d : {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0}) {
            auto m = manipulate(base, tv, d);
            CHECK(m.shape.coeffs[0] == Catch::Approx(d));
        }
    }
    SECTION("dimension mismatch") {
        CHECK_THROWS_AS(manipulate(sv("x", {1.0, 2.0}), tv, 1.0), DimensionMismatch);
    }
}

TEST_CASE("manipulation is linear in delta") {
    auto shapes = random_shape(3, 5, 8);
    TraitVector tv = fit_trait_vector(shapes, {1, -1, 2, 0.5, -0.25}, TraitDimension::Competent);
    const auto& base = shapes[0];
    auto once = manipulate(manipulate(base, tv, 1.25).shape, tv, -2.5);
    auto direct = manipulate(base, tv, 1.25 - 2.5);
    for (std::size_t i = 0; i < base.dim(); ++i)
        CHECK(once.shape.coeffs[i] == Catch::Approx(direct.shape.coeffs[i]).margin(1e-9));
}

TEST_CASE("fit_trait_vector is scale-covariant in scores") {
    auto shapes = random_shape(11, 6, 10);
    Vec scores = {0.3, -1.2, 0.8, 2.0, -0.5, 0.1};
    auto tv1 = fit_trait_vector(shapes, scores, TraitDimension::Extroverted);
    for (auto& s : scores) s *= 3.5;
    auto tv2 = fit_trait_vector(shapes, scores, TraitDimension::Extroverted);
    for (std::size_t i = 0; i < tv1.dim(); ++i)
        CHECK(tv1.direction[i] == Catch::Approx(tv2.direction[i]).margin(1e-12));
    CHECK(tv2.raw_norm == Catch::Approx(3.5 * tv1.raw_norm));
}

TEST_CASE("generate_distinct_set cardinality") {
    auto bases = random_shape(5, 2, 4);
    auto shapes = random_shape(6, 3, 4);
    std::vector<TraitVector> tvs = {
        fit_trait_vector(shapes, {1, 0, 0}, TraitDimension::Trustworthy),
        fit_trait_vector(shapes, {0, 1, 0}, TraitDimension::Dominant),
    };
    auto set = generate_distinct_set(bases, tvs, {-1.0, 0.0, 1.0});
    REQUIRE(set.size() == 12);
    // all (base, trait, delta) triples distinct, matching the enumerated product
    std::set<std::tuple<std::string, std::string, double>> seen;
    for (const auto& f : set) seen.insert({f.base_id, trait_name(f.trait), f.delta});
    CHECK(seen.size() == 12);
}

TEST_CASE("generate_distinct_set paper-scale count") {
    auto bases = random_shape(7, 75, 6);
    auto ref = random_shape(8, 10, 6);
    std::vector<TraitVector> tvs;
    std::vector<TraitDimension> five = {TraitDimension::Attractive, TraitDimension::Competent,
                                        TraitDimension::Dominant, TraitDimension::Extroverted,
                                        TraitDimension::Trustworthy};
    for (auto t : five)
        tvs.push_back(fit_trait_vector(ref, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, t));
    auto set = generate_distinct_set(bases, tvs, {-3.0, -1.5, 0.0, 1.5, 3.0});
    CHECK(set.size() == 1875);
}

TEST_CASE("single base, single trait, delta 0 reproduces the base") {
    auto bases = random_shape(9, 1, 5);
    auto tv = fit_trait_vector(bases, {1.0}, TraitDimension::Likeable);
    auto set = generate_distinct_set(bases, {tv}, {0.0});
    REQUIRE(set.size() == 1);
    CHECK(set[0].shape.coeffs == bases[0].coeffs);
}

TEST_CASE("random_shape determinism and dimensions") {
    auto a = random_shape(42, 10, 7);
    auto b = random_shape(42, 10, 7);
    REQUIRE(a.size() == 10);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].coeffs == b[i].coeffs);
    auto big = random_shape(1, 300, 50);
    CHECK(big.size() == 300);
    CHECK(big.front().dim() == 50);
}

TEST_CASE("random_shape law-of-large-numbers moments") {
    auto shapes = random_shape(123, 10000, 3);
    for (std::size_t j = 0; j < 3; ++j) {
        double m = 0.0, m2 = 0.0;
        for (const auto& s : shapes) {
            m += s.coeffs[j];
            m2 += s.coeffs[j] * s.coeffs[j];
        }
        m /= 10000.0;
        m2 /= 10000.0;
        CHECK(std::fabs(m) < 0.05);
        CHECK(std::fabs(m2 - m * m - 1.0) < 0.05);
    }
}

TEST_CASE("refit recovery after manipulation") {
    auto bases = random_shape(21, 40, 12);
    // zero-mean the bases so manipulated deltas dominate the refit
    Vec mean(12, 0.0);
    for (const auto& b : bases)
        for (std::size_t i = 0; i < 12; ++i) mean[i] += b.coeffs[i] / 40.0;
    for (auto& b : bases)
        for (std::size_t i = 0; i < 12; ++i) b.coeffs[i] -= mean[i];

    auto ref = random_shape(22, 30, 12);
    Vec ref_scores(30);
    Rng rng(5);
    for (auto& s : ref_scores) s = gaussian(rng);
    auto tv = fit_trait_vector(ref, ref_scores, TraitDimension::Trustworthy);

    std::vector<ShapeVector> manipulated;
    Vec deltas_as_scores;
    for (const auto& b : bases)
        for (double d : {-3.0, -1.5, 0.0, 1.5, 3.0}) {
            manipulated.push_back(manipulate(b, tv, d).shape);
            deltas_as_scores.push_back(d);
        }
    auto refit = fit_trait_vector(manipulated, deltas_as_scores, TraitDimension::Trustworthy);
    CHECK(dot(refit.direction, tv.direction) >= 0.99);
}

TEST_CASE("shapes and trait vector files round-trip") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "biasprobe_shape_io";
    fs::create_directories(dir);

    auto shapes = random_shape(3, 4, 6);
    save_shapes((dir / "shapes.csv").string(), shapes, "deadbeef", 3);
    auto loaded = load_shapes((dir / "shapes.csv").string());
    REQUIRE(loaded.size() == shapes.size());
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        CHECK(loaded[i].face_id == shapes[i].face_id);
        CHECK(loaded[i].coeffs == shapes[i].coeffs); // bit-exact via round-trip formatting
    }

    auto tv = fit_trait_vector(shapes, {1, 2, 3, 4}, TraitDimension::Dominant);
    save_trait_vectors((dir / "tv.csv").string(), {tv});
    auto tvs = load_trait_vectors((dir / "tv.csv").string());
    REQUIRE(tvs.size() == 1);
    CHECK(tvs[0].trait == TraitDimension::Dominant);
    CHECK(tvs[0].direction == tv.direction);
    CHECK(tvs[0].raw_norm == tv.raw_norm);
}
