#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasprobe/csv.hpp"
#include "biasprobe/embeddings.hpp"
#include "biasprobe/errors.hpp"
#include "biasprobe/forest.hpp"
#include "biasprobe/ratings.hpp"
#include "biasprobe/rng.hpp"
#include "biasprobe/stats.hpp"
#include "biasprobe/traits.hpp"

namespace biasprobe {

enum class Origin { Random, Distinct };

/// A face ready for an experiment: trait scores plus an embedding. Distinct
/// faces carry the delta-derived score for their own trait only.
struct LabeledFace {
    std::string face_id;
    Origin origin = Origin::Random;
    std::string base_id; // Distinct origin only
    double delta = 0.0;  // Distinct origin only
    std::map<TraitDimension, double> scores;
    Vec embedding;

    double score_for(TraitDimension t) const {
        auto it = scores.find(t);
        if (it == scores.end())
            throw DataError("face " + face_id + " has no " + trait_name(t) + " score");
        return it->second;
    }
    bool has_score(TraitDimension t) const { return scores.count(t) > 0; }
};

struct ElectionRace {
    std::string race_id;
    int year = 0;
    std::string office; // open enum: "senate", "gubernatorial", ...
    std::string winner_face_id;
    std::string runnerup_face_id;
    double vote_share_winner = 0.0;
    double vote_share_runnerup = 0.0;
    std::optional<double> human_competence_winner;
    std::optional<double> human_competence_runnerup;
};

// ---- k-fold -----------------------------------------------------------------

/// Shuffled partition into k near-equal folds; fold sizes differ by at most 1.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k,
                                                        std::uint64_t seed) {
    if (k < 2 || n < k) throw TooFewSamples("make_folds: need n >= k >= 2");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, 0xf01d5ULL);
    for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[rng() % i]);
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(order[i]);
    return folds;
}

/// Out-of-fold regression predictions: each row is predicted exactly once by a
/// model trained on the other k-1 folds.
inline std::vector<double> kfold_predictions(const std::vector<std::vector<double>>& x,
                                             const std::vector<double>& y, std::size_t k,
                                             ForestParams params, std::uint64_t seed) {
    auto folds = make_folds(x.size(), k, seed);
    std::vector<double> oof(x.size(), 0.0);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::vector<double>> xt;
        std::vector<double> yt;
        std::vector<char> in_test(x.size(), 0);
        for (std::size_t i : folds[f]) in_test[i] = 1;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!in_test[i]) {
                xt.push_back(x[i]);
                yt.push_back(y[i]);
            }
        params.seed = derive_seed(seed, 0xcf01dULL, f);
        RegressionForest model = RegressionForest::fit(xt, yt, params);
        for (std::size_t i : folds[f]) oof[i] = model.predict(x[i]);
    }
    return oof;
}

inline std::vector<int> kfold_class_predictions(const std::vector<std::vector<double>>& x,
                                                const std::vector<int>& labels, int n_classes,
                                                std::size_t k, ForestParams params,
                                                std::uint64_t seed) {
    auto folds = make_folds(x.size(), k, seed);
    std::vector<int> oof(x.size(), 0);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::vector<double>> xt;
        std::vector<int> yt;
        std::vector<char> in_test(x.size(), 0);
        for (std::size_t i : folds[f]) in_test[i] = 1;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!in_test[i]) {
                xt.push_back(x[i]);
                yt.push_back(labels[i]);
            }
        params.seed = derive_seed(seed, 0xcf01dULL, f);
        ClassForest model = ClassForest::fit(xt, yt, n_classes, params);
        for (std::size_t i : folds[f]) oof[i] = model.predict_class(x[i]);
    }
    return oof;
}

// ---- reports ----------------------------------------------------------------

struct RegressionStats {
    double rho = 0.0, p_value = 1.0, rmse_value = 0.0, explained_var = 0.0;
    std::size_t n = 0;

    static RegressionStats from(const std::vector<double>& pred, const std::vector<double>& actual) {
        CorrelationResult c = pearson(pred, actual);
        return {c.rho, c.p_value, rmse(pred, actual), explained_variance(pred, actual), c.n};
    }

    nlohmann::json to_json() const {
        return {{"rho", rho}, {"p_value", p_value}, {"rmse", rmse_value},
                {"explained_variance", explained_var}, {"n", n}};
    }
};

struct ClassificationStats {
    double acc = 0.0;
    Confusion conf;
    std::size_t n = 0;

    nlohmann::json to_json() const {
        return {{"accuracy", acc},
                {"n", n},
                {"confusion", {{"tp", conf.tp}, {"fp", conf.fp}, {"fn", conf.fn}, {"tn", conf.tn}}}};
    }
};

struct ExperimentAReport {
    TraitDimension trait;
    RegressionStats pooled, random_subset, distinct_subset;

    nlohmann::json to_json() const {
        return {{"experiment", "A"},
                {"trait", trait_name(trait)},
                {"pooled", pooled.to_json()},
                {"random_subset", random_subset.to_json()},
                {"distinct_subset", distinct_subset.to_json()}};
    }
};

struct ExperimentBReport {
    TraitDimension trait;
    RegressionStats test_on_random; // fit on Distinct, evaluated on Random
    RegressionStats train_cv;       // 10-fold CV within the Distinct training set

    nlohmann::json to_json() const {
        return {{"experiment", "B"},
                {"trait", trait_name(trait)},
                {"test_on_random", test_on_random.to_json()},
                {"train_cv", train_cv.to_json()}};
    }
};

struct ExperimentCReport {
    TraitDimension trait;
    ClassificationStats pooled_cv, distinct_to_random, random_only_cv;
    bool single_class_training = false;

    nlohmann::json to_json() const {
        return {{"experiment", "C"},
                {"trait", trait_name(trait)},
                {"pooled_cv", pooled_cv.to_json()},
                {"distinct_to_random", distinct_to_random.to_json()},
                {"random_only_cv", random_only_cv.to_json()},
                {"single_class_training", single_class_training}};
    }
};

struct OfficeStats {
    std::size_t n_races = 0, wins = 0;
    double win_rate = 0.0, chi2_p = 1.0;

    nlohmann::json to_json() const {
        return {{"n_races", n_races}, {"wins", wins}, {"win_rate", win_rate}, {"chi2_p", chi2_p}};
    }
};

struct ExperimentDReport {
    std::map<std::string, OfficeStats> per_office;
    // winner-minus-runnerup predicted competence vs winner-minus-runnerup
    // vote share fraction
    double spread_rho = 0.0, spread_p = 1.0;
    std::optional<double> human_rho, human_p;
    std::size_t skipped_races = 0;

    nlohmann::json to_json() const {
        nlohmann::json offices = nlohmann::json::object();
        for (const auto& [office, s] : per_office) offices[office] = s.to_json();
        nlohmann::json j = {{"experiment", "D"},
                            {"per_office", offices},
                            {"spread_rho", spread_rho},
                            {"spread_p", spread_p},
                            {"spread_definition", "vote share fraction difference, winner minus runner-up"},
                            {"skipped_races", skipped_races}};
        if (human_rho) {
            j["human_rho"] = *human_rho;
            j["human_p"] = *human_p;
        }
        return j;
    }
};

// ---- experiments ------------------------------------------------------------

namespace experiment_detail {

inline std::vector<const LabeledFace*> with_trait(const std::vector<LabeledFace>& faces,
                                                  TraitDimension trait) {
    std::vector<const LabeledFace*> out;
    for (const auto& f : faces)
        if (f.has_score(trait)) out.push_back(&f);
    return out;
}

inline void check_embeddings(const std::vector<const LabeledFace*>& faces) {
    for (const auto* f : faces)
        if (f->embedding.empty()) throw MissingEmbedding("face " + f->face_id + " has no embedding");
}

} // namespace experiment_detail

/// Pooled 10-fold CV over mixed random + manipulated faces, with per-origin
/// breakdown of the out-of-fold predictions.
inline ExperimentAReport experiment_a(const std::vector<LabeledFace>& random_faces,
                                      const std::vector<LabeledFace>& distinct_faces,
                                      TraitDimension trait, const ForestParams& params,
                                      std::uint64_t seed, std::size_t k = 10) {
    auto rnd = experiment_detail::with_trait(random_faces, trait);
    auto dst = experiment_detail::with_trait(distinct_faces, trait);
    if (rnd.empty()) throw EmptyData("experiment_a: no random faces with trait score");
    experiment_detail::check_embeddings(rnd);
    experiment_detail::check_embeddings(dst);

    std::vector<std::vector<double>> x;
    std::vector<double> y;
    std::vector<Origin> origin;
    for (const auto* f : rnd) {
        x.push_back(f->embedding);
        y.push_back(f->score_for(trait));
        origin.push_back(Origin::Random);
    }
    for (const auto* f : dst) {
        x.push_back(f->embedding);
        y.push_back(f->score_for(trait));
        origin.push_back(Origin::Distinct);
    }
    std::vector<double> oof = kfold_predictions(x, y, k, params, seed);

    ExperimentAReport rep;
    rep.trait = trait;
    rep.pooled = RegressionStats::from(oof, y);
    std::vector<double> pr, ar, pd, ad;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (origin[i] == Origin::Random) {
            pr.push_back(oof[i]);
            ar.push_back(y[i]);
        } else {
            pd.push_back(oof[i]);
            ad.push_back(y[i]);
        }
    }
    rep.random_subset = RegressionStats::from(pr, ar);
    if (!pd.empty()) rep.distinct_subset = RegressionStats::from(pd, ad);
    return rep;
}

/// Fit on the manipulated set only, evaluate on the random set only; train/test
/// disjointness is asserted structurally on face ids.
inline ExperimentBReport experiment_b(const std::vector<LabeledFace>& distinct_faces,
                                      const std::vector<LabeledFace>& random_faces,
                                      TraitDimension trait, ForestParams params,
                                      std::uint64_t seed, std::size_t k = 10) {
    auto dst = experiment_detail::with_trait(distinct_faces, trait);
    auto rnd = experiment_detail::with_trait(random_faces, trait);
    if (dst.empty() || rnd.empty()) throw EmptyData("experiment_b: empty train or test set");
    experiment_detail::check_embeddings(dst);
    experiment_detail::check_embeddings(rnd);

    std::set<std::string> train_ids;
    for (const auto* f : dst) train_ids.insert(f->face_id);
    for (const auto* f : rnd)
        if (train_ids.count(f->face_id))
            throw InvariantViolation("experiment_b: face " + f->face_id +
                                     " appears in both train and test sets");

    std::vector<std::vector<double>> xt, xe;
    std::vector<double> yt, ye;
    for (const auto* f : dst) {
        xt.push_back(f->embedding);
        yt.push_back(f->score_for(trait));
    }
    for (const auto* f : rnd) {
        xe.push_back(f->embedding);
        ye.push_back(f->score_for(trait));
    }

    ExperimentBReport rep;
    rep.trait = trait;
    std::vector<double> cv = kfold_predictions(xt, yt, k, params, seed);
    rep.train_cv = RegressionStats::from(cv, yt);
    params.seed = derive_seed(seed, 0xeb0ULL);
    RegressionForest model = RegressionForest::fit(xt, yt, params);
    rep.test_on_random = RegressionStats::from(model.predict_all(xe), ye);
    return rep;
}

/// Classification variant: labels binarized by score sign, Gini forest,
/// accuracy + confusion under the pooled-CV, distinct-to-random, and
/// random-only-CV regimes.
inline ExperimentCReport experiment_c(const std::vector<LabeledFace>& random_faces,
                                      const std::vector<LabeledFace>& distinct_faces,
                                      TraitDimension trait, ForestParams params,
                                      std::uint64_t seed, std::size_t k = 10) {
    auto rnd = experiment_detail::with_trait(random_faces, trait);
    auto dst = experiment_detail::with_trait(distinct_faces, trait);
    if (rnd.empty()) throw EmptyData("experiment_c: no random faces with trait score");
    experiment_detail::check_embeddings(rnd);
    experiment_detail::check_embeddings(dst);

    auto label_of = [&](const LabeledFace* f) {
        return f->score_for(trait) >= 0.0 ? 1 : 0; // 1 = Positive
    };
    std::vector<std::vector<double>> xr, xd;
    std::vector<int> yr, yd;
    for (const auto* f : rnd) {
        xr.push_back(f->embedding);
        yr.push_back(label_of(f));
    }
    for (const auto* f : dst) {
        xd.push_back(f->embedding);
        yd.push_back(label_of(f));
    }

    auto stats_of = [](const std::vector<int>& pred, const std::vector<int>& truth) {
        ClassificationStats s;
        s.acc = accuracy(pred, truth);
        s.conf = confusion(pred, truth, 1);
        s.n = pred.size();
        return s;
    };

    ExperimentCReport rep;
    rep.trait = trait;

    std::vector<std::vector<double>> xp = xr;
    std::vector<int> yp = yr;
    xp.insert(xp.end(), xd.begin(), xd.end());
    yp.insert(yp.end(), yd.begin(), yd.end());
    rep.pooled_cv = stats_of(kfold_class_predictions(xp, yp, 2, k, params, seed), yp);

    if (!xd.empty()) {
        rep.single_class_training =
            std::all_of(yd.begin(), yd.end(), [&](int l) { return l == yd.front(); });
        ForestParams p2 = params;
        p2.seed = derive_seed(seed, 0xec0ULL);
        ClassForest model = ClassForest::fit(xd, yd, 2, p2);
        std::vector<int> pred(xr.size());
        for (std::size_t i = 0; i < xr.size(); ++i) pred[i] = model.predict_class(xr[i]);
        rep.distinct_to_random = stats_of(pred, yr);
    }

    rep.random_only_cv =
        stats_of(kfold_class_predictions(xr, yr, 2, k, params, derive_seed(seed, 0xec1ULL)), yr);
    return rep;
}

/// Train a competence model on the manipulated set, then predict each race's
/// winner as the candidate with the higher predicted competence. Races missing
/// an embedding for either candidate are skipped and counted.
inline ExperimentDReport experiment_d(const std::vector<ElectionRace>& races,
                                      const std::map<std::string, Vec>& candidate_embeddings,
                                      const std::vector<LabeledFace>& distinct_faces,
                                      ForestParams params, std::uint64_t seed) {
    auto dst = experiment_detail::with_trait(distinct_faces, TraitDimension::Competent);
    if (dst.empty()) throw EmptyData("experiment_d: no competence-labeled training faces");
    experiment_detail::check_embeddings(dst);
    std::vector<std::vector<double>> xt;
    std::vector<double> yt;
    for (const auto* f : dst) {
        xt.push_back(f->embedding);
        yt.push_back(f->score_for(TraitDimension::Competent));
    }
    params.seed = derive_seed(seed, 0xed0ULL);
    RegressionForest model = RegressionForest::fit(xt, yt, params);

    ExperimentDReport rep;
    std::vector<double> pred_diff, vote_spread;
    std::vector<double> human_pred, human_actual;
    for (const auto& race : races) {
        auto wit = candidate_embeddings.find(race.winner_face_id);
        auto rit = candidate_embeddings.find(race.runnerup_face_id);
        if (wit == candidate_embeddings.end() || rit == candidate_embeddings.end()) {
            ++rep.skipped_races;
            continue;
        }
        const double pw = model.predict(wit->second);
        const double pr = model.predict(rit->second);
        // candidate-order invariant: ties break on face id, not input order
        const bool predicted_winner_won =
            pw > pr || (pw == pr && race.winner_face_id < race.runnerup_face_id);
        OfficeStats& os = rep.per_office[race.office];
        ++os.n_races;
        if (predicted_winner_won) ++os.wins;
        pred_diff.push_back(pw - pr);
        vote_spread.push_back(race.vote_share_winner - race.vote_share_runnerup);
        if (race.human_competence_winner && race.human_competence_runnerup) {
            human_pred.push_back(pw);
            human_actual.push_back(*race.human_competence_winner);
            human_pred.push_back(pr);
            human_actual.push_back(*race.human_competence_runnerup);
        }
    }
    for (auto& [office, os] : rep.per_office) {
        os.win_rate = static_cast<double>(os.wins) / static_cast<double>(os.n_races);
        os.chi2_p = chi2_proportion(os.wins, os.n_races, 0.5);
    }
    if (pred_diff.size() >= 3) {
        CorrelationResult c = pearson(pred_diff, vote_spread);
        rep.spread_rho = c.rho;
        rep.spread_p = c.p_value;
    }
    if (human_pred.size() >= 3) {
        CorrelationResult c = pearson(human_pred, human_actual);
        rep.human_rho = c.rho;
        rep.human_p = c.p_value;
    }
    return rep;
}

// ---- projection diagnostic --------------------------------------------------

/// Mean silhouette width for an integer labeling, computed on the given
/// points. Singleton clusters contribute 0.
inline double silhouette(const std::vector<Vec>& points, const std::vector<int>& labels) {
    const std::size_t n = points.size();
    if (n != labels.size()) throw LengthMismatch("silhouette: label count mismatch");
    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters[labels[i]].push_back(i);
    if (clusters.size() < 2) throw InvariantViolation("silhouette: need at least 2 clusters");

    auto dist = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t j = 0; j < points[a].size(); ++j) {
            const double d = points[a][j] - points[b][j];
            s += d * d;
        }
        return std::sqrt(s);
    };

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& own = clusters.at(labels[i]);
        if (own.size() == 1) continue; // s(i) = 0
        double a = 0.0;
        for (std::size_t j : own)
            if (j != i) a += dist(i, j);
        a /= static_cast<double>(own.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [lab, members] : clusters) {
            if (lab == labels[i]) continue;
            double m = 0.0;
            for (std::size_t j : members) m += dist(i, j);
            m /= static_cast<double>(members.size());
            b = std::min(b, m);
        }
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

struct ProjectionDiagnostic {
    std::vector<std::array<double, 2>> coords; // top-2 principal components
    double identity_silhouette = 0.0;
    double trait_sign_silhouette = 0.0;

    nlohmann::json to_json() const {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& c : coords) pts.push_back({c[0], c[1]});
        return {{"diagnostic", "pca_projection"},
                {"identity_silhouette", identity_silhouette},
                {"trait_sign_silhouette", trait_sign_silhouette},
                {"silhouette_space", "full embedding space"},
                {"coords", pts}};
    }
};

/// Top-2 PCA coordinates of the embeddings plus two cluster-purity scores:
/// silhouette when grouping by base identity and when grouping by trait-score
/// sign. Silhouettes are computed on the full embedding vectors; the 2D
/// coordinates are for plotting.
inline ProjectionDiagnostic projection_diagnostic(const std::vector<LabeledFace>& faces) {
    if (faces.size() < 3) throw TooFewSamples("projection_diagnostic: need at least 3 faces");
    const std::size_t d = faces.front().embedding.size();
    std::vector<Vec> pts;
    pts.reserve(faces.size());
    Vec mean(d, 0.0);
    for (const auto& f : faces) {
        if (f.embedding.size() != d)
            throw DimensionMismatch("projection_diagnostic: ragged embeddings");
        pts.push_back(f.embedding);
        for (std::size_t j = 0; j < d; ++j) mean[j] += f.embedding[j];
    }
    for (auto& m : mean) m /= static_cast<double>(faces.size());
    for (auto& p : pts)
        for (std::size_t j = 0; j < d; ++j) p[j] -= mean[j];

    Matrix cov(d, d);
    for (const auto& p : pts)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) cov(i, j) += p[i] * p[j];
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) cov(i, j) /= static_cast<double>(pts.size());
        trace += cov(i, i);
    }
    if (trace < 1e-18) throw DegenerateCovariance("projection_diagnostic: identical embeddings");

    auto [l1, v1] = power_iteration(cov);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) cov(i, j) -= l1 * v1[i] * v1[j];
    auto [l2, v2] = power_iteration(cov);

    ProjectionDiagnostic out;
    out.coords.reserve(pts.size());
    for (const auto& p : pts) out.coords.push_back({dot(p, v1), dot(p, v2)});

    std::map<std::string, int> id_map;
    std::vector<int> identity(faces.size()), sign(faces.size());
    for (std::size_t i = 0; i < faces.size(); ++i) {
        const std::string key =
            faces[i].origin == Origin::Distinct ? faces[i].base_id : faces[i].face_id;
        auto [it, inserted] = id_map.try_emplace(key, static_cast<int>(id_map.size()));
        identity[i] = it->second;
        double score = 0.0;
        if (!faces[i].scores.empty()) score = faces[i].scores.begin()->second;
        if (faces[i].origin == Origin::Distinct) score = faces[i].delta;
        sign[i] = score >= 0.0 ? 1 : 0;
    }
    out.identity_silhouette = silhouette(pts, identity);
    out.trait_sign_silhouette = silhouette(pts, sign);
    return out;
}

// ---- races file format ------------------------------------------------------

inline void save_races(const std::string& path, const std::vector<ElectionRace>& races,
                       const std::string& config_hash = "", std::uint64_t seed = 0) {
    csv::Writer w(path);
    if (!config_hash.empty()) {
        w.meta("config_hash", config_hash);
        w.meta("seed", std::to_string(seed));
    }
    w.row({"race_id", "year", "office", "winner_face_id", "runnerup_face_id", "vote_share_winner",
           "vote_share_runnerup", "human_competence_winner", "human_competence_runnerup"});
    for (const auto& r : races) {
        std::vector<std::string> row = {r.race_id,
                                        std::to_string(r.year),
                                        r.office,
                                        r.winner_face_id,
                                        r.runnerup_face_id,
                                        csv::format_double(r.vote_share_winner),
                                        csv::format_double(r.vote_share_runnerup)};
        if (r.human_competence_winner && r.human_competence_runnerup) {
            row.push_back(csv::format_double(*r.human_competence_winner));
            row.push_back(csv::format_double(*r.human_competence_runnerup));
        } else {
            row.push_back("");
            row.push_back("");
        }
        w.row(row);
    }
}

inline std::vector<ElectionRace> load_races(const std::string& path) {
    csv::File f = csv::read_file(path);
    if (f.header.size() < 7 || f.header[0] != "race_id")
        throw ParseError(path + ": expected races header");
    std::vector<ElectionRace> out;
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        const auto& row = f.rows[i];
        if (row.size() < 7) throw ParseError(path + ": row " + std::to_string(i + 1) + " malformed");
        ElectionRace r;
        r.race_id = row[0];
        r.year = static_cast<int>(csv::parse_long(row[1], i + 1));
        r.office = row[2];
        r.winner_face_id = row[3];
        r.runnerup_face_id = row[4];
        r.vote_share_winner = csv::parse_double(row[5], i + 1);
        r.vote_share_runnerup = csv::parse_double(row[6], i + 1);
        if (r.vote_share_winner < 0.0 || r.vote_share_winner > 1.0 || r.vote_share_runnerup < 0.0 ||
            r.vote_share_runnerup > 1.0 || r.vote_share_winner < r.vote_share_runnerup)
            throw DataError(path + ": row " + std::to_string(i + 1) + ": invalid vote shares");
        if (row.size() >= 9 && !row[7].empty() && !row[8].empty()) {
            r.human_competence_winner = csv::parse_double(row[7], i + 1);
            r.human_competence_runnerup = csv::parse_double(row[8], i + 1);
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace biasprobe
