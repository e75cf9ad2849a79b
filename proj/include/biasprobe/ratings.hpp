#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "biasprobe/csv.hpp"
#include "biasprobe/errors.hpp"
#include "biasprobe/rng.hpp"
#include "biasprobe/traits.hpp"

namespace biasprobe {

/// One rater's 9-point judgment of one face on one trait.
struct RatingRecord {
    std::string face_id;
    TraitDimension trait;
    std::string rater_id;
    int rating; // 1..9
};

/// Trait judgment in SD-from-mean units, multiplied by 100.
struct TraitScore {
    std::string face_id;
    TraitDimension trait;
    double score;
};

enum class TraitClass { Negative, Positive };

/// Arithmetic means on the raw 1-9 scale, per face, for one trait.
inline std::map<std::string, double> mean_ratings(const std::vector<RatingRecord>& records,
                                                  TraitDimension trait) {
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& r : records) {
        if (r.trait != trait) continue;
        auto& [sum, n] = acc[r.face_id];
        sum += r.rating;
        ++n;
    }
    std::map<std::string, double> out;
    for (const auto& [id, sn] : acc) out[id] = sn.first / static_cast<double>(sn.second);
    return out;
}

inline double mean_rating_for(const std::vector<RatingRecord>& records, TraitDimension trait,
                              const std::string& face_id) {
    auto means = mean_ratings(records, trait);
    auto it = means.find(face_id);
    if (it == means.end())
        throw MissingRatings("no " + trait_name(trait) + " ratings for face " + face_id);
    return it->second;
}

/// score = 100 * (mean - mu) / sigma, population sigma over the dataset.
inline std::vector<TraitScore> zscore_scale(const std::map<std::string, double>& means,
                                            TraitDimension trait) {
    if (means.size() < 2) throw TooFewSamples("zscore_scale: need at least 2 faces");
    double mu = 0.0;
    for (const auto& [id, m] : means) mu += m;
    mu /= static_cast<double>(means.size());
    double var = 0.0;
    for (const auto& [id, m] : means) var += (m - mu) * (m - mu);
    var /= static_cast<double>(means.size());
    if (var < 1e-24) throw ZeroVariance("zscore_scale: all means equal");
    const double sigma = std::sqrt(var);
    std::vector<TraitScore> out;
    out.reserve(means.size());
    for (const auto& [id, m] : means) out.push_back({id, trait, 100.0 * (m - mu) / sigma});
    return out;
}

/// Cronbach's alpha with raters as items, population variances.
/// `matrix[i][j]` is rater i's rating of face j.
inline double cronbach_alpha(const std::vector<std::vector<double>>& matrix) {
    const std::size_t k = matrix.size();
    if (k < 2) throw TooFewSamples("cronbach_alpha: need at least 2 raters");
    const std::size_t n = matrix.front().size();
    if (n < 2) throw TooFewSamples("cronbach_alpha: need at least 2 faces");
    for (const auto& row : matrix)
        if (row.size() != n) throw LengthMismatch("cronbach_alpha: ragged rating matrix");

    auto pop_var = [](const std::vector<double>& v) {
        double mu = 0.0;
        for (double x : v) mu += x;
        mu /= static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += (x - mu) * (x - mu);
        return s / static_cast<double>(v.size());
    };

    double sum_item_var = 0.0;
    for (const auto& row : matrix) sum_item_var += pop_var(row);

    std::vector<double> totals(n, 0.0);
    for (const auto& row : matrix)
        for (std::size_t j = 0; j < n; ++j) totals[j] += row[j];
    const double total_var = pop_var(totals);
    if (total_var < 1e-24) throw ZeroVariance("cronbach_alpha: zero total variance");
    const double kk = static_cast<double>(k);
    return kk / (kk - 1.0) * (1.0 - sum_item_var / total_var);
}

/// Rating matrix (raters x faces) from records, for one trait. Requires every
/// rater to have rated every face.
inline std::vector<std::vector<double>> rating_matrix(const std::vector<RatingRecord>& records,
                                                      TraitDimension trait) {
    std::map<std::string, std::map<std::string, double>> by_rater;
    std::map<std::string, bool> faces;
    for (const auto& r : records) {
        if (r.trait != trait) continue;
        by_rater[r.rater_id][r.face_id] = r.rating;
        faces[r.face_id] = true;
    }
    std::vector<std::vector<double>> m;
    for (const auto& [rater, row] : by_rater) {
        std::vector<double> v;
        for (const auto& [face, unused] : faces) {
            auto it = row.find(face);
            if (it == row.end())
                throw MissingRatings("rater " + rater + " missing rating for face " + face);
            v.push_back(it->second);
        }
        m.push_back(std::move(v));
    }
    return m;
}

/// Synthetic raters: rating = clamp(round(5 + 2*(z + eps)), 1, 9) with
/// z = score/100 and eps ~ Normal(0, noise_sd). Deterministic given the seed.
inline std::vector<RatingRecord> simulate_raters(const std::vector<TraitScore>& true_scores,
                                                 double noise_sd, std::size_t n_raters,
                                                 std::uint64_t seed) {
    if (noise_sd < 0.0) throw InvariantViolation("simulate_raters: noise_sd must be >= 0");
    if (n_raters < 1) throw InvariantViolation("simulate_raters: need at least one rater");
    std::vector<RatingRecord> out;
    out.reserve(true_scores.size() * n_raters);
    for (std::size_t f = 0; f < true_scores.size(); ++f) {
        const auto& ts = true_scores[f];
        Rng rng = make_rng(seed, f);
        for (std::size_t r = 0; r < n_raters; ++r) {
            const double z = ts.score / 100.0;
            const double eps = noise_sd * gaussian(rng);
            int rating = static_cast<int>(std::lround(5.0 + 2.0 * (z + eps)));
            rating = std::clamp(rating, 1, 9);
            out.push_back({ts.face_id, ts.trait, "rater_" + std::to_string(r), rating});
        }
    }
    return out;
}

/// score >= 0 -> Positive (ties break Positive by convention).
inline std::map<std::string, TraitClass> binarize(const std::vector<TraitScore>& scores) {
    std::map<std::string, TraitClass> out;
    for (const auto& s : scores)
        out[s.face_id] = s.score >= 0.0 ? TraitClass::Positive : TraitClass::Negative;
    return out;
}

// ---- file formats -----------------------------------------------------------

inline void save_ratings(const std::string& path, const std::vector<RatingRecord>& records,
                         const std::string& config_hash = "", std::uint64_t seed = 0) {
    csv::Writer w(path);
    if (!config_hash.empty()) {
        w.meta("config_hash", config_hash);
        w.meta("seed", std::to_string(seed));
    }
    w.row({"face_id", "trait", "rater_id", "rating"});
    for (const auto& r : records)
        w.row({r.face_id, trait_name(r.trait), r.rater_id, std::to_string(r.rating)});
}

inline std::vector<RatingRecord> load_ratings(const std::string& path) {
    csv::File f = csv::read_file(path);
    if (f.header != std::vector<std::string>{"face_id", "trait", "rater_id", "rating"})
        throw ParseError(path + ": expected header face_id,trait,rater_id,rating");
    std::vector<RatingRecord> out;
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
        const auto& row = f.rows[r];
        if (row.size() != 4) throw ParseError(path + ": row " + std::to_string(r + 1) + " malformed");
        int rating = static_cast<int>(csv::parse_long(row[3], r + 1));
        if (rating < 1 || rating > 9)
            throw ParseError(path + ": row " + std::to_string(r + 1) + ": rating out of [1,9]");
        out.push_back({row[0], trait_from_name(row[1]), row[2], rating});
    }
    return out;
}

inline void save_scores(const std::string& path, const std::vector<TraitScore>& scores,
                        const std::string& config_hash = "", std::uint64_t seed = 0) {
    csv::Writer w(path);
    if (!config_hash.empty()) {
        w.meta("config_hash", config_hash);
        w.meta("seed", std::to_string(seed));
    }
    w.row({"face_id", "trait", "score"});
    for (const auto& s : scores) w.row({s.face_id, trait_name(s.trait), csv::format_double(s.score)});
}

inline std::vector<TraitScore> load_scores(const std::string& path) {
    csv::File f = csv::read_file(path);
    if (f.header != std::vector<std::string>{"face_id", "trait", "score"})
        throw ParseError(path + ": expected header face_id,trait,score");
    std::vector<TraitScore> out;
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
        const auto& row = f.rows[r];
        if (row.size() != 3) throw ParseError(path + ": row " + std::to_string(r + 1) + " malformed");
        out.push_back({row[0], trait_from_name(row[1]), csv::parse_double(row[2], r + 1)});
    }
    return out;
}

} // namespace biasprobe
