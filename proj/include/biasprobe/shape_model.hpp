#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "biasprobe/csv.hpp"
#include "biasprobe/errors.hpp"
#include "biasprobe/linalg.hpp"
#include "biasprobe/rng.hpp"
#include "biasprobe/traits.hpp"

namespace biasprobe {

/// A face as coordinates in the low-dimensional shape space (default D=50).
struct ShapeVector {
    std::string face_id;
    Vec coeffs;

    std::size_t dim() const { return coeffs.size(); }
};

/// Unit direction in shape space along which a perceived trait changes maximally.
struct TraitVector {
    TraitDimension trait;
    Vec direction;   // unit norm
    double raw_norm; // norm of the unnormalized fit, kept for diagnostics

    std::size_t dim() const { return direction.size(); }
};

/// A base face translated delta SD along a trait direction; delta is the
/// ground-truth label of the face in SD units.
struct ManipulatedFace {
    std::string base_id;
    TraitDimension trait;
    double delta;
    ShapeVector shape;
};

/// Best linear trait direction from rated shapes: the matrix-vector product of
/// the shape columns with the z-scores, normalized to unit length.
/// `shapes` holds one column per face; `scores` are the faces' z-scores.
inline TraitVector fit_trait_vector(const std::vector<Vec>& shape_columns,
                                    const Vec& scores, TraitDimension trait) {
    if (shape_columns.size() != scores.size())
        throw DimensionMismatch("fit_trait_vector: " + std::to_string(shape_columns.size()) +
                                " shapes vs " + std::to_string(scores.size()) + " scores");
    if (shape_columns.empty()) throw DimensionMismatch("fit_trait_vector: no shapes");
    const std::size_t d = shape_columns.front().size();
    Vec t(d, 0.0);
    for (std::size_t n = 0; n < shape_columns.size(); ++n) {
        const Vec& col = shape_columns[n];
        if (col.size() != d) throw DimensionMismatch("fit_trait_vector: ragged shape dimensions");
        for (std::size_t i = 0; i < d; ++i) t[i] += col[i] * scores[n];
    }
    double nrm = norm2(t);
    if (nrm < 1e-12)
        throw DegenerateRatings("fit_trait_vector: ratings give no direction (zero norm)");
    for (auto& x : t) x /= nrm;
    return TraitVector{trait, std::move(t), nrm};
}

inline TraitVector fit_trait_vector(const std::vector<ShapeVector>& shapes,
                                    const Vec& scores, TraitDimension trait) {
    std::vector<Vec> cols;
    cols.reserve(shapes.size());
    for (const auto& s : shapes) cols.push_back(s.coeffs);
    return fit_trait_vector(cols, scores, trait);
}

/// alpha' = alpha + delta * t_hat
inline ManipulatedFace manipulate(const ShapeVector& base, const TraitVector& tv, double delta) {
    if (base.dim() != tv.dim())
        throw DimensionMismatch("manipulate: shape dim " + std::to_string(base.dim()) +
                                " vs trait dim " + std::to_string(tv.dim()));
    ShapeVector out;
    out.face_id = base.face_id + ":" + trait_name(tv.trait) + ":" + csv::format_double(delta);
    out.coeffs = base.coeffs;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += delta * tv.direction[i];
    return ManipulatedFace{base.face_id, tv.trait, delta, std::move(out)};
}

/// Full Cartesian product bases x trait vectors x deltas.
inline std::vector<ManipulatedFace> generate_distinct_set(const std::vector<ShapeVector>& bases,
                                                          const std::vector<TraitVector>& tvs,
                                                          const Vec& deltas) {
    if (bases.empty() || tvs.empty() || deltas.empty())
        throw DimensionMismatch("generate_distinct_set: empty input");
    std::vector<ManipulatedFace> out;
    out.reserve(bases.size() * tvs.size() * deltas.size());
    for (const auto& base : bases)
        for (const auto& tv : tvs)
            for (double delta : deltas) out.push_back(manipulate(base, tv, delta));
    return out;
}

/// i.i.d. standard normal shape coefficients, deterministic given the seed.
inline std::vector<ShapeVector> random_shape(std::uint64_t seed, std::size_t count, std::size_t dim,
                                             const std::string& id_prefix = "face") {
    if (count < 1 || dim < 1) throw InvariantViolation("random_shape: count and dim must be >= 1");
    std::vector<ShapeVector> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        Rng rng = make_rng(seed, n); // per-face stream so generation parallelizes
        ShapeVector s;
        s.face_id = id_prefix + "_" + std::to_string(n);
        s.coeffs.resize(dim);
        for (auto& c : s.coeffs) c = gaussian(rng);
        out.push_back(std::move(s));
    }
    return out;
}

// ---- file formats -----------------------------------------------------------

inline void save_shapes(const std::string& path, const std::vector<ShapeVector>& shapes,
                        const std::string& config_hash = "", std::uint64_t seed = 0) {
    csv::Writer w(path);
    if (!config_hash.empty()) {
        w.meta("config_hash", config_hash);
        w.meta("seed", std::to_string(seed));
    }
    if (shapes.empty()) throw DataError("save_shapes: nothing to save");
    std::vector<std::string> header = {"face_id"};
    for (std::size_t i = 0; i < shapes.front().dim(); ++i) header.push_back("c_" + std::to_string(i));
    w.row(header);
    for (const auto& s : shapes) {
        std::vector<std::string> row = {s.face_id};
        for (double c : s.coeffs) row.push_back(csv::format_double(c));
        w.row(row);
    }
}

inline std::vector<ShapeVector> load_shapes(const std::string& path) {
    csv::File f = csv::read_file(path);
    if (f.header.empty() || f.header[0] != "face_id")
        throw ParseError(path + ": expected header face_id,c_0,...");
    const std::size_t d = f.header.size() - 1;
    std::vector<ShapeVector> out;
    out.reserve(f.rows.size());
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
        const auto& row = f.rows[r];
        if (row.size() != d + 1)
            throw ParseError(path + ": row " + std::to_string(r + 1) + " has " +
                             std::to_string(row.size() - 1) + " coefficients, expected " +
                             std::to_string(d));
        ShapeVector s;
        s.face_id = row[0];
        s.coeffs.reserve(d);
        for (std::size_t i = 1; i < row.size(); ++i) s.coeffs.push_back(csv::parse_double(row[i], r + 1));
        out.push_back(std::move(s));
    }
    return out;
}

inline void save_trait_vectors(const std::string& path, const std::vector<TraitVector>& tvs,
                               const std::string& config_hash = "", std::uint64_t seed = 0) {
    csv::Writer w(path);
    if (!config_hash.empty()) {
        w.meta("config_hash", config_hash);
        w.meta("seed", std::to_string(seed));
    }
    if (tvs.empty()) throw DataError("save_trait_vectors: nothing to save");
    std::vector<std::string> header = {"trait", "raw_norm"};
    for (std::size_t i = 0; i < tvs.front().dim(); ++i) header.push_back("d_" + std::to_string(i));
    w.row(header);
    for (const auto& tv : tvs) {
        std::vector<std::string> row = {trait_name(tv.trait), csv::format_double(tv.raw_norm)};
        for (double c : tv.direction) row.push_back(csv::format_double(c));
        w.row(row);
    }
}

inline std::vector<TraitVector> load_trait_vectors(const std::string& path) {
    csv::File f = csv::read_file(path);
    if (f.header.size() < 3 || f.header[0] != "trait" || f.header[1] != "raw_norm")
        throw ParseError(path + ": expected header trait,raw_norm,d_0,...");
    const std::size_t d = f.header.size() - 2;
    std::vector<TraitVector> out;
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
        const auto& row = f.rows[r];
        if (row.size() != d + 2) throw ParseError(path + ": row " + std::to_string(r + 1) + " malformed");
        TraitVector tv;
        tv.trait = trait_from_name(row[0]);
        tv.raw_norm = csv::parse_double(row[1], r + 1);
        for (std::size_t i = 2; i < row.size(); ++i) tv.direction.push_back(csv::parse_double(row[i], r + 1));
        out.push_back(std::move(tv));
    }
    return out;
}

} // namespace biasprobe
