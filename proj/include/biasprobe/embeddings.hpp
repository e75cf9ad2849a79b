#pragma once

#include <string>
#include <vector>

#include "biasprobe/csv.hpp"
#include "biasprobe/errors.hpp"
#include "biasprobe/linalg.hpp"
#include "biasprobe/rng.hpp"
#include "biasprobe/shape_model.hpp"

namespace biasprobe {

inline constexpr std::size_t kEmbeddingDim = 128;

struct Embedding {
    std::string face_id;
    Vec vector;
};

/// Deterministic stand-in for an external feature extractor. The leakage knob
/// controls how much shape information along the null directions survives into
/// the embedding: components along null directions are scaled by lambda,
/// everything else passes through, then a fixed seeded map with orthonormal
/// columns lifts the result to the embedding space.
struct SyntheticEmbedderSpec {
    std::uint64_t seed = 0;
    double leakage = 1.0; // lambda in [0,1]
    std::size_t shape_dim = 50;
    std::size_t embed_dim = kEmbeddingDim;
    std::vector<Vec> null_directions; // unit vectors in shape space
};

class SyntheticEmbedder {
public:
    explicit SyntheticEmbedder(SyntheticEmbedderSpec spec) : spec_(std::move(spec)) {
        if (spec_.leakage < 0.0 || spec_.leakage > 1.0)
            throw InvariantViolation("SyntheticEmbedder: leakage must be in [0,1]");
        if (spec_.embed_dim < spec_.shape_dim)
            throw InvariantViolation("SyntheticEmbedder: embed_dim must be >= shape_dim");
        for (const auto& d : spec_.null_directions)
            if (d.size() != spec_.shape_dim)
                throw DimensionMismatch("SyntheticEmbedder: null direction dimension mismatch");
        map_ = Matrix(spec_.embed_dim, spec_.shape_dim);
        Rng rng = make_rng(spec_.seed, 0x0e1bedULL);
        for (auto& x : map_.data) x = gaussian(rng);
        orthonormalize_columns(map_);
    }

    const SyntheticEmbedderSpec& spec() const { return spec_; }

    Embedding embed(const ShapeVector& shape) const {
        if (shape.dim() != spec_.shape_dim)
            throw DimensionMismatch("synthetic_embed: shape dim " + std::to_string(shape.dim()) +
                                    " vs spec dim " + std::to_string(spec_.shape_dim));
        // s' = lambda*s + (1-lambda)*P_null(s)
        Vec s = shape.coeffs;
        for (const auto& d : spec_.null_directions) {
            const double proj = dot(shape.coeffs, d);
            const double shrink = (1.0 - spec_.leakage) * proj;
            for (std::size_t i = 0; i < s.size(); ++i) s[i] -= shrink * d[i];
        }
        return Embedding{shape.face_id, matvec(map_, s)};
    }

    /// Least-squares inversion back to shape space; with orthonormal columns
    /// this is just the transpose applied to the embedding.
    Vec invert(const Vec& embedding) const {
        if (embedding.size() != spec_.embed_dim)
            throw DimensionMismatch("invert: embedding dimension mismatch");
        return matvec_t(map_, embedding);
    }

private:
    SyntheticEmbedderSpec spec_;
    Matrix map_;
};

inline Embedding synthetic_embed(const ShapeVector& shape, const SyntheticEmbedderSpec& spec) {
    return SyntheticEmbedder(spec).embed(shape);
}

// ---- file format ------------------------------------------------------------

inline void save_embeddings(const std::string& path, const std::vector<Embedding>& embeddings,
                            const std::string& config_hash = "", std::uint64_t seed = 0) {
    if (embeddings.empty()) throw DataError("save_embeddings: nothing to save");
    csv::Writer w(path);
    if (!config_hash.empty()) {
        w.meta("config_hash", config_hash);
        w.meta("seed", std::to_string(seed));
    }
    std::vector<std::string> header = {"face_id"};
    for (std::size_t i = 0; i < embeddings.front().vector.size(); ++i)
        header.push_back("dim_" + std::to_string(i));
    w.row(header);
    for (const auto& e : embeddings) {
        std::vector<std::string> row = {e.face_id};
        for (double v : e.vector) row.push_back(csv::format_double(v));
        w.row(row);
    }
}

inline std::vector<Embedding> load_embeddings(const std::string& path,
                                              std::size_t expected_dim = kEmbeddingDim) {
    csv::File f = csv::read_file(path);
    if (f.header.empty() || f.header[0] != "face_id")
        throw ParseError(path + ": expected header face_id,dim_0,...");
    if (f.header.size() != expected_dim + 1)
        throw DimensionError(path + ": header has " + std::to_string(f.header.size() - 1) +
                             " dimensions, expected " + std::to_string(expected_dim));
    std::vector<Embedding> out;
    out.reserve(f.rows.size());
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
        const auto& row = f.rows[r];
        if (row.size() != expected_dim + 1)
            throw DimensionError(path + ": row " + std::to_string(r + 1) + " has " +
                                 std::to_string(row.size() - 1) + " values, expected " +
                                 std::to_string(expected_dim));
        Embedding e;
        e.face_id = row[0];
        e.vector.reserve(expected_dim);
        for (std::size_t i = 1; i < row.size(); ++i) e.vector.push_back(csv::parse_double(row[i], r + 1));
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace biasprobe
