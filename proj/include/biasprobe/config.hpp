#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasprobe/errors.hpp"
#include "biasprobe/forest.hpp"
#include "biasprobe/lime.hpp"
#include "biasprobe/traits.hpp"
#include "biasprobe/world.hpp"

namespace biasprobe {

/// One JSON file drives every stage; command-line flags may override only the
/// scalar knobs (seed, threads, output_dir).
struct RunConfig {
    WorldConfig world;
    ForestParams forest;
    ElectionConfig election;
    std::size_t cv_folds = 10;

    // explanation stage
    int slic_k = 300;
    double slic_compactness = 10.0;
    int slic_iters = 10;
    LimeOptions lime;
    std::string scorer_command; // empty: use the bundled demo scorer
    std::string images_dir;     // empty: synthesize probe images

    // data ingestion overrides (empty: synthesize)
    std::string embeddings_path;
    std::string ratings_path;
    std::string races_path;

    std::string output_dir = "out";
    int threads = 1;

    nlohmann::json canonical_json() const;
    std::string hash() const;
};

namespace config_detail {

inline void expect_keys(const nlohmann::json& j, const std::string& where,
                        const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

} // namespace config_detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using config_detail::expect_keys;
    using config_detail::get_or;

    expect_keys(j, "config",
                {"seed", "shape_dim", "n_random_faces", "n_base_faces", "delta_grid", "traits",
                 "raters", "embedder", "label_nonlinearity", "nonlinear_gain", "forest", "cv_folds",
                 "election", "explain", "ratings_path", "races_path", "output_dir", "threads"});

    RunConfig cfg;
    cfg.world.seed = get_or<std::uint64_t>(j, "seed", cfg.world.seed);
    cfg.world.shape_dim = get_or<std::size_t>(j, "shape_dim", cfg.world.shape_dim);
    cfg.world.n_random = get_or<std::size_t>(j, "n_random_faces", cfg.world.n_random);
    cfg.world.n_bases = get_or<std::size_t>(j, "n_base_faces", cfg.world.n_bases);
    cfg.world.label_nonlinearity =
        get_or<double>(j, "label_nonlinearity", cfg.world.label_nonlinearity);
    cfg.world.nonlinear_gain = get_or<double>(j, "nonlinear_gain", cfg.world.nonlinear_gain);
    if (j.contains("delta_grid")) {
        cfg.world.delta_grid = get_or<Vec>(j, "delta_grid", cfg.world.delta_grid);
        if (cfg.world.delta_grid.empty()) throw ConfigError("delta_grid: must not be empty");
    }
    if (j.contains("traits")) {
        cfg.world.traits.clear();
        for (const auto& name : get_or<std::vector<std::string>>(j, "traits", {})) {
            try {
                cfg.world.traits.push_back(trait_from_name(name));
            } catch (const Error&) {
                throw ConfigError("traits: unknown trait '" + name + "'");
            }
        }
        if (cfg.world.traits.empty()) throw ConfigError("traits: must not be empty");
    }
    if (j.contains("raters")) {
        const auto& r = j.at("raters");
        expect_keys(r, "raters", {"count", "noise_sd"});
        cfg.world.n_raters = get_or<std::size_t>(r, "count", cfg.world.n_raters);
        cfg.world.noise_sd = get_or<double>(r, "noise_sd", cfg.world.noise_sd);
        if (cfg.world.n_raters < 1) throw ConfigError("raters.count: must be >= 1");
        if (cfg.world.noise_sd < 0.0) throw ConfigError("raters.noise_sd: must be >= 0");
    }
    if (j.contains("embedder")) {
        const auto& e = j.at("embedder");
        expect_keys(e, "embedder", {"type", "leakage", "null_directions", "embed_dim", "path"});
        const std::string type = get_or<std::string>(e, "type", "synthetic");
        if (type == "synthetic") {
            cfg.world.leakage = get_or<double>(e, "leakage", cfg.world.leakage);
            cfg.world.n_null_directions =
                get_or<std::size_t>(e, "null_directions", cfg.world.n_null_directions);
            cfg.world.embed_dim = get_or<std::size_t>(e, "embed_dim", cfg.world.embed_dim);
            if (cfg.world.leakage < 0.0 || cfg.world.leakage > 1.0)
                throw ConfigError("embedder.leakage: must be in [0, 1]");
        } else if (type == "file") {
            cfg.embeddings_path = get_or<std::string>(e, "path", "");
            if (cfg.embeddings_path.empty()) throw ConfigError("embedder.path: required for type 'file'");
        } else {
            throw ConfigError("embedder.type: expected 'synthetic' or 'file'");
        }
    }
    if (j.contains("forest")) {
        const auto& f = j.at("forest");
        expect_keys(f, "forest", {"n_trees", "min_split", "max_depth", "mtry", "bootstrap"});
        cfg.forest.n_trees = get_or<int>(f, "n_trees", cfg.forest.n_trees);
        cfg.forest.min_split = get_or<int>(f, "min_split", cfg.forest.min_split);
        cfg.forest.max_depth = get_or<int>(f, "max_depth", cfg.forest.max_depth);
        cfg.forest.mtry = get_or<int>(f, "mtry", cfg.forest.mtry);
        cfg.forest.bootstrap = get_or<bool>(f, "bootstrap", cfg.forest.bootstrap);
        if (cfg.forest.n_trees < 1) throw ConfigError("forest.n_trees: must be >= 1");
        if (cfg.forest.min_split < 2) throw ConfigError("forest.min_split: must be >= 2");
    }
    cfg.cv_folds = get_or<std::size_t>(j, "cv_folds", cfg.cv_folds);
    if (cfg.cv_folds < 2) throw ConfigError("cv_folds: must be >= 2");
    if (j.contains("election")) {
        const auto& e = j.at("election");
        expect_keys(e, "election",
                    {"seed", "races_per_office", "offices", "min_competence_gap", "spread_scale",
                     "spread_noise", "scramble_labels", "include_human_scores"});
        cfg.election.seed = get_or<std::uint64_t>(e, "seed", cfg.election.seed);
        cfg.election.races_per_office =
            get_or<std::size_t>(e, "races_per_office", cfg.election.races_per_office);
        cfg.election.offices =
            get_or<std::vector<std::string>>(e, "offices", cfg.election.offices);
        cfg.election.min_competence_gap =
            get_or<double>(e, "min_competence_gap", cfg.election.min_competence_gap);
        cfg.election.spread_scale = get_or<double>(e, "spread_scale", cfg.election.spread_scale);
        cfg.election.spread_noise = get_or<double>(e, "spread_noise", cfg.election.spread_noise);
        cfg.election.scramble_labels =
            get_or<bool>(e, "scramble_labels", cfg.election.scramble_labels);
        cfg.election.include_human_scores =
            get_or<bool>(e, "include_human_scores", cfg.election.include_human_scores);
        if (cfg.election.races_per_office < 1)
            throw ConfigError("election.races_per_office: must be >= 1");
        if (cfg.election.offices.empty()) throw ConfigError("election.offices: must not be empty");
    }
    if (j.contains("explain")) {
        const auto& e = j.at("explain");
        expect_keys(e, "explain",
                    {"slic_k", "compactness", "iters", "n_samples", "kernel_width", "ridge",
                     "top_k", "scorer_command", "images_dir"});
        cfg.slic_k = get_or<int>(e, "slic_k", cfg.slic_k);
        cfg.slic_compactness = get_or<double>(e, "compactness", cfg.slic_compactness);
        cfg.slic_iters = get_or<int>(e, "iters", cfg.slic_iters);
        cfg.lime.n_samples = get_or<std::size_t>(e, "n_samples", cfg.lime.n_samples);
        cfg.lime.kernel_width = get_or<double>(e, "kernel_width", cfg.lime.kernel_width);
        cfg.lime.ridge = get_or<double>(e, "ridge", cfg.lime.ridge);
        cfg.lime.top_k = get_or<std::size_t>(e, "top_k", cfg.lime.top_k);
        cfg.scorer_command = get_or<std::string>(e, "scorer_command", cfg.scorer_command);
        cfg.images_dir = get_or<std::string>(e, "images_dir", cfg.images_dir);
        if (cfg.slic_k < 1) throw ConfigError("explain.slic_k: must be >= 1");
        if (cfg.lime.kernel_width <= 0.0) throw ConfigError("explain.kernel_width: must be > 0");
        if (cfg.lime.ridge < 0.0) throw ConfigError("explain.ridge: must be >= 0");
    }
    cfg.ratings_path = get_or<std::string>(j, "ratings_path", cfg.ratings_path);
    cfg.races_path = get_or<std::string>(j, "races_path", cfg.races_path);
    cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
    cfg.threads = get_or<int>(j, "threads", cfg.threads);
    if (cfg.threads < 1) throw ConfigError("threads: must be >= 1");
    if (cfg.world.shape_dim < 1) throw ConfigError("shape_dim: must be >= 1");
    if (cfg.world.embed_dim < cfg.world.shape_dim)
        throw ConfigError("embedder.embed_dim: must be >= shape_dim");
    if (cfg.world.n_random < cfg.cv_folds)
        throw ConfigError("n_random_faces: must be >= cv_folds");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

inline nlohmann::json RunConfig::canonical_json() const {
    std::vector<std::string> trait_names;
    for (auto t : world.traits) trait_names.push_back(trait_name(t));
    return {{"seed", world.seed},
            {"shape_dim", world.shape_dim},
            {"n_random_faces", world.n_random},
            {"n_base_faces", world.n_bases},
            {"delta_grid", world.delta_grid},
            {"traits", trait_names},
            {"raters", {{"count", world.n_raters}, {"noise_sd", world.noise_sd}}},
            {"embedder",
             {{"type", embeddings_path.empty() ? "synthetic" : "file"},
              {"leakage", world.leakage},
              {"null_directions", world.n_null_directions},
              {"embed_dim", world.embed_dim},
              {"path", embeddings_path}}},
            {"label_nonlinearity", world.label_nonlinearity},
            {"nonlinear_gain", world.nonlinear_gain},
            {"forest",
             {{"n_trees", forest.n_trees},
              {"min_split", forest.min_split},
              {"max_depth", forest.max_depth},
              {"mtry", forest.mtry},
              {"bootstrap", forest.bootstrap}}},
            {"cv_folds", cv_folds},
            {"election",
             {{"seed", election.seed},
              {"races_per_office", election.races_per_office},
              {"offices", election.offices},
              {"min_competence_gap", election.min_competence_gap},
              {"spread_scale", election.spread_scale},
              {"spread_noise", election.spread_noise},
              {"scramble_labels", election.scramble_labels},
              {"include_human_scores", election.include_human_scores}}},
            {"explain",
             {{"slic_k", slic_k},
              {"compactness", slic_compactness},
              {"iters", slic_iters},
              {"n_samples", lime.n_samples},
              {"kernel_width", lime.kernel_width},
              {"ridge", lime.ridge},
              {"top_k", lime.top_k},
              {"scorer_command", scorer_command},
              {"images_dir", images_dir}}},
            {"ratings_path", ratings_path},
            {"races_path", races_path}};
}

/// FNV-1a over the canonical (sorted-key, no-whitespace) dump. Deliberately
/// excludes output_dir and threads: neither changes any computed value.
inline std::string RunConfig::hash() const {
    const std::string dump = canonical_json().dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

} // namespace biasprobe
