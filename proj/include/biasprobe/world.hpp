#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "biasprobe/embeddings.hpp"
#include "biasprobe/errors.hpp"
#include "biasprobe/experiments.hpp"
#include "biasprobe/ratings.hpp"
#include "biasprobe/rng.hpp"
#include "biasprobe/shape_model.hpp"
#include "biasprobe/traits.hpp"

namespace biasprobe {

/// Configuration of the synthetic ground-truth world. Human judgments of the
/// random faces are generated from a planted linear direction per trait plus a
/// nonlinear component whose strength is the label-noise knob eta; the
/// embedder's leakage lambda controls how much shape information survives
/// into the features.
struct WorldConfig {
    std::uint64_t seed = 1;
    std::size_t shape_dim = 50;
    std::size_t n_random = 300;
    std::size_t n_bases = 75;
    Vec delta_grid = {-3.0, -1.5, 0.0, 1.5, 3.0};
    std::vector<TraitDimension> traits{all_traits.begin(), all_traits.end()};
    std::size_t n_raters = 15;
    double noise_sd = 1.5; // calibrated so 15 raters land at alpha ~ 0.84
    double leakage = 0.6;  // lambda
    double label_nonlinearity = 0.8; // eta
    double nonlinear_gain = 2.5;
    std::size_t n_null_directions = 10;
    std::size_t embed_dim = kEmbeddingDim;
};

struct World {
    WorldConfig config;
    std::vector<ShapeVector> random_shapes, base_shapes;
    std::map<TraitDimension, TraitVector> trait_vectors;
    std::vector<ManipulatedFace> distinct;
    std::vector<RatingRecord> ratings;                       // simulated, random faces
    std::map<TraitDimension, std::vector<TraitScore>> observed_scores; // z-scored means
    SyntheticEmbedderSpec embedder_spec;
    std::vector<LabeledFace> random_faces, distinct_faces;   // experiment-ready
};

namespace world_detail {

inline Vec random_unit_vector(std::uint64_t seed, std::size_t dim) {
    Rng rng(seed);
    Vec v(dim);
    for (auto& x : v) x = gaussian(rng);
    const double nrm = norm2(v);
    for (auto& x : v) x /= nrm;
    return v;
}

inline std::vector<Vec> orthonormal_directions(std::uint64_t seed, std::size_t dim,
                                               std::size_t count) {
    Matrix m(dim, count);
    Rng rng(seed);
    for (auto& x : m.data) x = gaussian(rng);
    orthonormalize_columns(m);
    std::vector<Vec> out(count, Vec(dim));
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t i = 0; i < dim; ++i) out[j][i] = m(i, j);
    return out;
}

} // namespace world_detail

/// Ground-truth z-score of one face for one trait. The nonlinear component is
/// standardized over a reference population so eta trades off linear and
/// nonlinear signal at fixed total variance.
struct TraitGroundTruth {
    Vec linear_dir, nonlin_gate, nonlin_carrier; // unit vectors in shape space
    double eta = 0.0, gain = 1.0;
    double q_mean = 0.0, q_sd = 1.0; // standardization of the nonlinear term

    double raw_nonlinear(const Vec& coeffs) const {
        return std::tanh(dot(nonlin_gate, coeffs)) * dot(nonlin_carrier, coeffs);
    }

    double z(const Vec& coeffs) const {
        const double lin = dot(linear_dir, coeffs);
        const double q = (raw_nonlinear(coeffs) - q_mean) / q_sd;
        const double eg = eta * gain;
        return (lin + eg * q) / std::sqrt(1.0 + eg * eg);
    }
};

inline TraitGroundTruth make_ground_truth(const WorldConfig& cfg, std::size_t trait_index,
                                          const std::vector<ShapeVector>& reference) {
    TraitGroundTruth gt;
    gt.linear_dir = world_detail::random_unit_vector(derive_seed(cfg.seed, 0x10, trait_index),
                                                     cfg.shape_dim);
    gt.nonlin_gate = world_detail::random_unit_vector(derive_seed(cfg.seed, 0x11, trait_index),
                                                      cfg.shape_dim);
    gt.nonlin_carrier = world_detail::random_unit_vector(derive_seed(cfg.seed, 0x12, trait_index),
                                                         cfg.shape_dim);
    gt.eta = cfg.label_nonlinearity;
    gt.gain = cfg.nonlinear_gain;
    double m = 0.0, m2 = 0.0;
    for (const auto& s : reference) {
        const double q = gt.raw_nonlinear(s.coeffs);
        m += q;
        m2 += q * q;
    }
    const double n = static_cast<double>(reference.size());
    m /= n;
    const double var = m2 / n - m * m;
    gt.q_mean = m;
    gt.q_sd = var > 1e-12 ? std::sqrt(var) : 1.0;
    return gt;
}

inline SyntheticEmbedderSpec make_embedder_spec(const WorldConfig& cfg) {
    SyntheticEmbedderSpec spec;
    spec.seed = derive_seed(cfg.seed, 0x03);
    spec.leakage = cfg.leakage;
    spec.shape_dim = cfg.shape_dim;
    spec.embed_dim = cfg.embed_dim;
    spec.null_directions = world_detail::orthonormal_directions(derive_seed(cfg.seed, 0x04),
                                                                cfg.shape_dim, cfg.n_null_directions);
    return spec;
}

inline World build_world(const WorldConfig& cfg) {
    World w;
    w.config = cfg;
    w.random_shapes = random_shape(derive_seed(cfg.seed, 0x01), cfg.n_random, cfg.shape_dim, "rand");
    w.base_shapes = random_shape(derive_seed(cfg.seed, 0x02), cfg.n_bases, cfg.shape_dim, "base");

    w.embedder_spec = make_embedder_spec(cfg);
    SyntheticEmbedder embedder(w.embedder_spec);

    // random faces: planted judgments -> simulated raters -> z-scored means
    std::map<std::string, LabeledFace> random_by_id;
    for (const auto& s : w.random_shapes) {
        LabeledFace f;
        f.face_id = s.face_id;
        f.origin = Origin::Random;
        f.embedding = embedder.embed(s).vector;
        random_by_id.emplace(s.face_id, std::move(f));
    }

    std::vector<TraitVector> tvs;
    for (std::size_t ti = 0; ti < cfg.traits.size(); ++ti) {
        const TraitDimension trait = cfg.traits[ti];
        TraitGroundTruth gt = make_ground_truth(cfg, ti, w.random_shapes);
        std::vector<TraitScore> truth;
        truth.reserve(cfg.n_random);
        for (const auto& s : w.random_shapes)
            truth.push_back({s.face_id, trait, 100.0 * gt.z(s.coeffs)});
        auto recs = simulate_raters(truth, cfg.noise_sd, cfg.n_raters,
                                    derive_seed(cfg.seed, 0x20, ti));
        w.ratings.insert(w.ratings.end(), recs.begin(), recs.end());
        auto means = mean_ratings(recs, trait);
        auto observed = zscore_scale(means, trait);
        w.observed_scores[trait] = observed;

        std::map<std::string, double> score_by_id;
        for (const auto& ts : observed) score_by_id[ts.face_id] = ts.score;
        Vec z_obs;
        z_obs.reserve(cfg.n_random);
        for (const auto& s : w.random_shapes) z_obs.push_back(score_by_id.at(s.face_id) / 100.0);
        TraitVector tv = fit_trait_vector(w.random_shapes, z_obs, trait);
        w.trait_vectors.emplace(trait, tv);
        tvs.push_back(std::move(tv));

        for (const auto& s : w.random_shapes)
            random_by_id.at(s.face_id).scores[trait] = score_by_id.at(s.face_id);
    }

    w.distinct = generate_distinct_set(w.base_shapes, tvs, cfg.delta_grid);
    for (const auto& mf : w.distinct) {
        LabeledFace f;
        f.face_id = mf.shape.face_id;
        f.origin = Origin::Distinct;
        f.base_id = mf.base_id;
        f.delta = mf.delta;
        f.scores[mf.trait] = 100.0 * mf.delta; // target SD as the training label
        f.embedding = embedder.embed(mf.shape).vector;
        w.distinct_faces.push_back(std::move(f));
    }
    for (const auto& s : w.random_shapes)
        w.random_faces.push_back(std::move(random_by_id.at(s.face_id)));
    return w;
}

// ---- synthetic elections ----------------------------------------------------

struct ElectionConfig {
    std::uint64_t seed = 7;
    std::size_t races_per_office = 120;
    std::vector<std::string> offices = {"gubernatorial", "senate"};
    double min_competence_gap = 1.5; // SD units of planted competence; calibrated
                                     // so the forest resolves the planted winner
    double spread_scale = 0.3;
    double spread_noise = 0.02;
    bool scramble_labels = false; // control: decouple faces from outcomes
    bool include_human_scores = true;
};

struct SyntheticElection {
    std::vector<ElectionRace> races;
    std::map<std::string, Vec> candidate_embeddings;
};

/// Races where a planted competence difference along the world's fitted
/// competence direction drives the vote spread. With scramble_labels the
/// winner assignment is randomized, severing that link.
inline SyntheticElection make_synthetic_races(const World& world, const ElectionConfig& cfg) {
    auto it = world.trait_vectors.find(TraitDimension::Competent);
    if (it == world.trait_vectors.end())
        throw DataError("make_synthetic_races: world has no competence trait vector");
    const TraitVector& comp = it->second;
    SyntheticEmbedder embedder(world.embedder_spec);

    SyntheticElection out;
    std::size_t face_counter = 0;
    for (std::size_t oi = 0; oi < cfg.offices.size(); ++oi) {
        Rng rng = make_rng(cfg.seed, 0xe1ec + oi);
        for (std::size_t r = 0; r < cfg.races_per_office; ++r) {
            auto draw = [&]() {
                ShapeVector s;
                s.face_id = "cand_" + std::to_string(face_counter++);
                s.coeffs.resize(world.config.shape_dim);
                for (auto& c : s.coeffs) c = gaussian(rng);
                return s;
            };
            // a is the planted winner. Both candidates are shifted along the
            // competence direction so the pair straddles a mildly jittered
            // midpoint with a planted gap drawn from a wide band: spreads get
            // usable variance while both stay inside the manipulated training
            // range the model saw
            ShapeVector a = draw(), b = draw();
            const double gap = cfg.min_competence_gap + 4.0 * uniform01(rng);
            const double mid = 0.3 * gaussian(rng);
            const double ca = mid + 0.5 * gap, cb = mid - 0.5 * gap;
            auto pin = [&](ShapeVector& s, double target) {
                const double cur = dot(comp.direction, s.coeffs);
                for (std::size_t i = 0; i < s.coeffs.size(); ++i)
                    s.coeffs[i] += (target - cur) * comp.direction[i];
            };
            pin(a, ca);
            pin(b, cb);
            // margin grows linearly with the competence difference so spread
            // correlations are not compressed
            double margin = cfg.spread_scale * 0.25 * (ca - cb) +
                            cfg.spread_noise * gaussian(rng);
            margin = std::clamp(margin, 0.001, 0.49);
            ElectionRace race;
            race.race_id = cfg.offices[oi] + "_" + std::to_string(r);
            race.year = 1996 + static_cast<int>(r % 12);
            race.office = cfg.offices[oi];
            race.winner_face_id = a.face_id;
            race.runnerup_face_id = b.face_id;
            race.vote_share_winner = 0.5 + margin;
            race.vote_share_runnerup = 0.5 - margin;
            if (cfg.include_human_scores) {
                race.human_competence_winner = 100.0 * ca;
                race.human_competence_runnerup = 100.0 * cb;
            }
            if (cfg.scramble_labels && (rng() & 1u)) {
                std::swap(race.winner_face_id, race.runnerup_face_id);
                if (cfg.include_human_scores)
                    std::swap(*race.human_competence_winner, *race.human_competence_runnerup);
            }
            out.candidate_embeddings[a.face_id] = embedder.embed(a).vector;
            out.candidate_embeddings[b.face_id] = embedder.embed(b).vector;
            out.races.push_back(std::move(race));
        }
    }
    return out;
}

} // namespace biasprobe
