// bias-probe: synthetic appearance-bias auditing pipeline. One JSON config
// drives every stage; all outputs are reproducible from (config, seed).

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "biasprobe/config.hpp"
#include "biasprobe/experiments.hpp"
#include "biasprobe/forest.hpp"
#include "biasprobe/image.hpp"
#include "biasprobe/lime.hpp"
#include "biasprobe/slic.hpp"
#include "biasprobe/subprocess_scorer.hpp"
#include "biasprobe/world.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace biasprobe;

namespace {

struct Session {
    RunConfig cfg;
    std::string hash;
    fs::path out;
    bool dry_run = false;

    fs::path artifact(const std::string& name) const { return out / name; }

    void log_stage(const std::string& stage, double elapsed_ms, const std::string& status) const {
        std::ofstream log(out / "run_log.jsonl", std::ios::app);
        log << json{{"stage", stage},
                    {"elapsed_ms", elapsed_ms},
                    {"status", status},
                    {"config_hash", hash},
                    {"seed", cfg.world.seed}}
                   .dump()
            << "\n";
    }

    void write_json(const std::string& name, json payload) const {
        payload["config_hash"] = hash;
        payload["seed"] = cfg.world.seed;
        std::ofstream out_file(artifact(name));
        if (!out_file) throw DataError("cannot write " + artifact(name).string());
        out_file << payload.dump(2) << "\n";
    }

    json read_artifact(const std::string& name) const {
        std::ifstream in(artifact(name));
        if (!in) throw DataError("missing artifact " + artifact(name).string() +
                                 " (run the producing stage first)");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw DataError(artifact(name).string() + ": " + e.what());
        }
        return j;
    }
};

// ---- stages -----------------------------------------------------------------

void stage_gen(const Session& s) {
    World w = build_world(s.cfg.world);
    save_shapes(s.artifact("shapes_random.csv").string(), w.random_shapes, s.hash, s.cfg.world.seed);
    save_shapes(s.artifact("shapes_base.csv").string(), w.base_shapes, s.hash, s.cfg.world.seed);
    save_ratings(s.artifact("ratings.csv").string(), w.ratings, s.hash, s.cfg.world.seed);
    std::vector<TraitScore> all_scores;
    for (TraitDimension t : s.cfg.world.traits) {
        const auto& per_trait = w.observed_scores.at(t);
        all_scores.insert(all_scores.end(), per_trait.begin(), per_trait.end());
    }
    save_scores(s.artifact("scores.csv").string(), all_scores, s.hash, s.cfg.world.seed);
}

void stage_fit_trait(const Session& s) {
    auto shapes = load_shapes(s.artifact("shapes_random.csv").string());
    auto scores = load_scores(s.artifact("scores.csv").string());
    std::map<TraitDimension, std::map<std::string, double>> by_trait;
    for (const auto& sc : scores) by_trait[sc.trait][sc.face_id] = sc.score;

    std::vector<TraitVector> tvs;
    for (const auto& [trait, by_id] : by_trait) {
        Vec z;
        z.reserve(shapes.size());
        for (const auto& shape : shapes) {
            auto it = by_id.find(shape.face_id);
            if (it == by_id.end())
                throw DataError("scores.csv: no " + trait_name(trait) + " score for " + shape.face_id);
            z.push_back(it->second / 100.0); // scores are SD*100; fit on plain z
        }
        tvs.push_back(fit_trait_vector(shapes, z, trait));
    }
    save_trait_vectors(s.artifact("trait_vectors.csv").string(), tvs, s.hash, s.cfg.world.seed);
}

void stage_manipulate(const Session& s) {
    auto bases = load_shapes(s.artifact("shapes_base.csv").string());
    auto tvs = load_trait_vectors(s.artifact("trait_vectors.csv").string());
    auto distinct = generate_distinct_set(bases, tvs, s.cfg.world.delta_grid);
    std::vector<ShapeVector> shapes;
    shapes.reserve(distinct.size());
    for (auto& m : distinct) shapes.push_back(std::move(m.shape));
    save_shapes(s.artifact("shapes_distinct.csv").string(), shapes, s.hash, s.cfg.world.seed);
}

void stage_embed(const Session& s) {
    if (!s.cfg.embeddings_path.empty()) {
        // ingestion path: validate the external file, then re-emit with metadata
        auto embs = load_embeddings(s.cfg.embeddings_path, s.cfg.world.embed_dim);
        save_embeddings(s.artifact("embeddings.csv").string(), embs, s.hash, s.cfg.world.seed);
        return;
    }
    SyntheticEmbedder embedder(make_embedder_spec(s.cfg.world));
    std::vector<Embedding> embs;
    auto add_all = [&](const std::string& file, bool required) {
        const auto path = s.artifact(file);
        if (!fs::exists(path)) {
            if (required) throw DataError("missing " + path.string() + " (run gen/manipulate first)");
            return;
        }
        for (const auto& shape : load_shapes(path.string())) embs.push_back(embedder.embed(shape));
    };
    add_all("shapes_random.csv", true);
    add_all("shapes_distinct.csv", false);
    save_embeddings(s.artifact("embeddings.csv").string(), embs, s.hash, s.cfg.world.seed);
}

ForestParams forest_params(const Session& s) {
    ForestParams p = s.cfg.forest;
    p.n_threads = s.cfg.threads;
    return p;
}

void stage_cv(const Session& s) {
    World w = build_world(s.cfg.world);
    json per_trait = json::object();
    for (TraitDimension t : s.cfg.world.traits) {
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        for (const auto& f : w.random_faces) {
            x.push_back(f.embedding);
            y.push_back(f.score_for(t));
        }
        auto oof = kfold_predictions(x, y, s.cfg.cv_folds, forest_params(s),
                                     derive_seed(s.cfg.world.seed, 0xc5, static_cast<std::uint64_t>(t)));
        per_trait[trait_name(t)] = RegressionStats::from(oof, y).to_json();
    }
    s.write_json("cv.json", {{"stage", "cv"}, {"folds", s.cfg.cv_folds}, {"per_trait", per_trait}});
}

void stage_exp(const Session& s, const std::string& which) {
    World w = build_world(s.cfg.world);
    const ForestParams params = forest_params(s);
    json per_trait = json::array();
    if (which == "a") {
        for (TraitDimension t : s.cfg.world.traits)
            per_trait.push_back(experiment_a(w.random_faces, w.distinct_faces, t, params,
                                             derive_seed(s.cfg.world.seed, 0xa0), s.cfg.cv_folds)
                                    .to_json());
        s.write_json("exp_a.json", {{"stage", "exp_a"}, {"per_trait", per_trait}});
    } else if (which == "b") {
        for (TraitDimension t : s.cfg.world.traits)
            per_trait.push_back(experiment_b(w.distinct_faces, w.random_faces, t, params,
                                             derive_seed(s.cfg.world.seed, 0xb0), s.cfg.cv_folds)
                                    .to_json());
        s.write_json("exp_b.json", {{"stage", "exp_b"}, {"per_trait", per_trait}});
    } else if (which == "c") {
        for (TraitDimension t : s.cfg.world.traits)
            per_trait.push_back(experiment_c(w.random_faces, w.distinct_faces, t, params,
                                             derive_seed(s.cfg.world.seed, 0xc0), s.cfg.cv_folds)
                                    .to_json());
        s.write_json("exp_c.json", {{"stage", "exp_c"}, {"per_trait", per_trait}});
    } else if (which == "d") {
        std::vector<ElectionRace> races;
        std::map<std::string, Vec> cand_embs;
        if (!s.cfg.races_path.empty()) {
            races = load_races(s.cfg.races_path);
            if (s.cfg.embeddings_path.empty())
                throw ConfigError("exp d with races_path requires embedder type 'file'");
            for (const auto& e : load_embeddings(s.cfg.embeddings_path, s.cfg.world.embed_dim))
                cand_embs[e.face_id] = e.vector;
        } else {
            auto elec = make_synthetic_races(w, s.cfg.election);
            races = std::move(elec.races);
            cand_embs = std::move(elec.candidate_embeddings);
            save_races(s.artifact("races.csv").string(), races, s.hash, s.cfg.world.seed);
        }
        auto rep = experiment_d(races, cand_embs, w.distinct_faces, params,
                                derive_seed(s.cfg.world.seed, 0xd0));
        json j = rep.to_json();
        j["stage"] = "exp_d";
        s.write_json("exp_d.json", std::move(j));
    } else {
        throw ConfigError("exp: expected one of a|b|c|d, got '" + which + "'");
    }
}

// ---- bundled demo scorer for the explain stage ------------------------------
//
// Probe images: noisy 64x64 gray faces with one fixed rectangular region whose
// brightness encodes a synthetic score. A forest is trained on 8x8 patch-grid
// mean intensities, so the whole explanation path runs with no external model.

constexpr int kProbeSize = 64;
constexpr int kPatchGrid = 8;
constexpr int kRegionX0 = 36, kRegionX1 = 56, kRegionY0 = 20, kRegionY1 = 40;

Vec patch_features(const Image& img) {
    Vec feat(static_cast<std::size_t>(kPatchGrid) * kPatchGrid, 0.0);
    std::vector<double> counts(feat.size(), 0.0);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::size_t cell = static_cast<std::size_t>(y * kPatchGrid / img.height) * kPatchGrid +
                                     static_cast<std::size_t>(x * kPatchGrid / img.width);
            feat[cell] += img.at(x, y);
            counts[cell] += 1.0;
        }
    for (std::size_t i = 0; i < feat.size(); ++i) feat[i] /= counts[i];
    return feat;
}

Image demo_probe_image(std::uint64_t seed, std::size_t index, double score) {
    Image img(kProbeSize, kProbeSize, 1);
    Rng rng = make_rng(derive_seed(seed, 0xfaceULL), index);
    for (auto& p : img.pixels)
        p = static_cast<std::uint8_t>(100 + static_cast<int>(rng() % 61) - 30);
    const double level = std::clamp(128.0 + 0.5 * score, 0.0, 255.0);
    for (int y = kRegionY0; y < kRegionY1; ++y)
        for (int x = kRegionX0; x < kRegionX1; ++x)
            img.at(x, y) = static_cast<std::uint8_t>(level);
    return img;
}

void stage_explain(const Session& s) {
    std::vector<Image> images;
    Scorer scorer;
    std::optional<SubprocessScorer> subprocess;

    if (!s.cfg.images_dir.empty()) {
        if (s.cfg.scorer_command.empty())
            throw ConfigError("explain.images_dir requires explain.scorer_command");
        std::vector<fs::path> paths;
        for (const auto& entry : fs::directory_iterator(s.cfg.images_dir))
            if (entry.path().extension() == ".png") paths.push_back(entry.path());
        if (paths.empty()) throw DataError("no .png images in " + s.cfg.images_dir);
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) images.push_back(load_png(p.string()));
        subprocess.emplace(s.cfg.scorer_command);
        scorer = subprocess->as_scorer((s.out / "scorer_scratch").string());
    } else {
        // demo cohort + forest scorer
        const std::size_t n_train = 48, n_explain = 8;
        Rng rng = make_rng(s.cfg.world.seed, 0xde30ULL);
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        for (std::size_t i = 0; i < n_train; ++i) {
            const double score = 100.0 * gaussian(rng);
            x.push_back(patch_features(demo_probe_image(s.cfg.world.seed, i, score)));
            y.push_back(score);
        }
        ForestParams params = forest_params(s);
        params.seed = derive_seed(s.cfg.world.seed, 0xde31ULL);
        auto model = std::make_shared<RegressionForest>(RegressionForest::fit(x, y, params));
        scorer = [model](const Image& img) { return model->predict(patch_features(img)); };
        for (std::size_t i = 0; i < n_explain; ++i)
            images.push_back(demo_probe_image(s.cfg.world.seed, i, y[i]));
    }

    LimeOptions lime_opts = s.cfg.lime;
    lime_opts.n_threads = subprocess ? 1 : static_cast<std::size_t>(s.cfg.threads);
    const int width = images.front().width, height = images.front().height;

    std::vector<ExplainedFace> explained;
    json faces = json::array();
    for (std::size_t i = 0; i < images.size(); ++i) {
        ExplainedFace ef;
        ef.image = images[i];
        ef.seg = slic(images[i], s.cfg.slic_k, s.cfg.slic_compactness, s.cfg.slic_iters);
        ef.expl = lime_explain(scorer, images[i], ef.seg, derive_seed(s.cfg.world.seed, 0xde32ULL, i),
                               lime_opts);
        json agree = json::array();
        for (int seg_id : ef.expl.top_segments)
            agree.push_back(static_cast<bool>(ef.expl.agreement[static_cast<std::size_t>(seg_id)]));
        faces.push_back({{"index", i},
                         {"segments", ef.seg.k},
                         {"model_score", ef.expl.model_score},
                         {"intercept", ef.expl.intercept},
                         {"top_segments", ef.expl.top_segments},
                         {"top_segment_agreement", agree}});
        explained.push_back(std::move(ef));
    }
    if (subprocess) subprocess->finish();

    Heatmap hm = aggregate_heatmap(explained, width, height);
    save_png(s.artifact("heatmap.png").string(), heatmap_to_image(hm));
    save_png(s.artifact("mean_face.png").string(), hm.mean_face);
    save_heatmap_csv(s.artifact("heatmap.csv").string(), hm);
    s.write_json("explain.json",
                 {{"stage", "explain"},
                  {"scorer", s.cfg.scorer_command.empty() ? "bundled-demo" : "subprocess"},
                  {"n_samples", lime_opts.n_samples},
                  {"faces", faces}});
}

void stage_project(const Session& s) {
    World w = build_world(s.cfg.world);
    auto diag = projection_diagnostic(w.distinct_faces);
    json j = diag.to_json();
    j["stage"] = "project";
    s.write_json("projection.json", std::move(j));
}

void stage_report(const Session& s) {
    const std::vector<std::string> known = {"cv.json",    "exp_a.json", "exp_b.json", "exp_c.json",
                                            "exp_d.json", "explain.json", "projection.json"};
    json artifacts = json::object();
    for (const auto& name : known) {
        if (!fs::exists(s.artifact(name))) continue;
        json j = s.read_artifact(name);
        const std::string h = j.value("config_hash", "");
        if (h != s.hash)
            throw DataError("report: " + name + " was produced under config hash " + h +
                            ", current config hashes to " + s.hash + "; refusing to mix");
        artifacts[name] = std::move(j);
    }
    if (artifacts.empty())
        throw DataError("report: no experiment artifacts in " + s.out.string() +
                        "; run the experiment stages first");

    // acceptance-style summary: evaluable rows get a verdict, the rest are
    // marked skipped so the table shape is stable
    json summary = json::array();
    auto add = [&](const std::string& check, json value, json pass) {
        summary.push_back({{"check", check}, {"value", std::move(value)}, {"pass", std::move(pass)}});
    };
    if (artifacts.contains("exp_a.json") && artifacts.contains("exp_b.json")) {
        double a_min = 1.0, b_max = -1.0;
        for (const auto& t : artifacts["exp_a.json"]["per_trait"])
            a_min = std::min(a_min, t["distinct_subset"]["rho"].get<double>());
        for (const auto& t : artifacts["exp_b.json"]["per_trait"])
            b_max = std::max(b_max, t["test_on_random"]["rho"].get<double>());
        add("generalization_gap",
            {{"exp_a_distinct_rho_min", a_min}, {"exp_b_test_rho_max", b_max}}, a_min > b_max);
    } else {
        add("generalization_gap", nullptr, "skipped");
    }
    if (artifacts.contains("exp_d.json")) {
        json rates = json::object();
        bool significant = true;
        for (const auto& [office, os] : artifacts["exp_d.json"]["per_office"].items()) {
            rates[office] = os["win_rate"];
            significant = significant && os["chi2_p"].get<double>() < 0.05;
        }
        add("election_win_rates", rates, significant);
    } else {
        add("election_win_rates", nullptr, "skipped");
    }
    if (artifacts.contains("projection.json")) {
        const double id_sil = artifacts["projection.json"]["identity_silhouette"].get<double>();
        const double sign_sil = artifacts["projection.json"]["trait_sign_silhouette"].get<double>();
        add("identity_over_trait_silhouette",
            {{"identity", id_sil}, {"trait_sign", sign_sil}}, id_sil > sign_sil);
    } else {
        add("identity_over_trait_silhouette", nullptr, "skipped");
    }
    s.write_json("report.json",
                 {{"stage", "report"}, {"summary", summary}, {"artifacts", artifacts}});
}

void dry_run_check(const Session& s) {
    auto must_exist = [](const std::string& what, const std::string& path) {
        if (!path.empty() && !fs::exists(path))
            throw ConfigError(what + ": referenced file does not exist: " + path);
    };
    must_exist("embedder.path", s.cfg.embeddings_path);
    must_exist("ratings_path", s.cfg.ratings_path);
    must_exist("races_path", s.cfg.races_path);
    must_exist("explain.images_dir", s.cfg.images_dir);
    std::cout << "config ok; hash " << s.hash << "; output dir " << s.out.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"appearance-bias auditing pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_override, exp_which;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_override;
    bool dry_run = false;
    app.add_option("--config", config_path, "JSON config file (defaults used when omitted)");
    app.add_option("--seed", seed_override, "override the master seed");
    app.add_option("--threads", threads_override, "override the worker pool size");
    app.add_option("--out", out_override, "override the output directory");
    app.add_flag("--dry-run", dry_run, "validate the config graph without computing");

    auto* gen = app.add_subcommand("gen", "synthesize shapes, ratings, and scores");
    auto* fit = app.add_subcommand("fit-trait", "fit trait vectors from shapes and scores");
    auto* man = app.add_subcommand("manipulate", "generate the maximally distinct face set");
    auto* emb = app.add_subcommand("embed", "embed shapes (synthetic) or ingest an embeddings file");
    auto* cv = app.add_subcommand("cv", "k-fold cross-validation per trait on random faces");
    auto* exp = app.add_subcommand("exp", "run experiment a|b|c|d");
    exp->add_option("which", exp_which, "experiment: a, b, c, or d")->required();
    auto* explain = app.add_subcommand("explain", "superpixel + local-surrogate explanations");
    auto* project = app.add_subcommand("project", "2-d projection and silhouette diagnostic");
    auto* report = app.add_subcommand("report", "bundle experiment artifacts into one report");
    // global flags may appear after the subcommand name
    for (auto* sub : {gen, fit, man, emb, cv, exp, explain, project, report}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::string stage_name =
        exp->parsed() ? "exp_" + exp_which : app.get_subcommands().front()->get_name();
    Session s;
    s.dry_run = dry_run;
    const auto started = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    };
    try {
        s.cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed_override) {
            s.cfg.world.seed = *seed_override;
            s.cfg.election.seed = derive_seed(*seed_override, 0xe1eccULL);
        }
        if (threads_override) {
            if (*threads_override < 1) throw ConfigError("threads: must be >= 1");
            s.cfg.threads = *threads_override;
        }
        if (!out_override.empty()) s.cfg.output_dir = out_override;
        s.hash = s.cfg.hash();
        s.out = s.cfg.output_dir;
        fs::create_directories(s.out);

        if (dry_run) {
            dry_run_check(s);
            return 0;
        }
        if (gen->parsed()) stage_gen(s);
        else if (fit->parsed()) stage_fit_trait(s);
        else if (man->parsed()) stage_manipulate(s);
        else if (emb->parsed()) stage_embed(s);
        else if (cv->parsed()) stage_cv(s);
        else if (exp->parsed()) stage_exp(s, exp_which);
        else if (explain->parsed()) stage_explain(s);
        else if (project->parsed()) stage_project(s);
        else if (report->parsed()) stage_report(s);
        s.log_stage(stage_name, elapsed_ms(), "ok");
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        if (!s.out.empty()) s.log_stage(stage_name, elapsed_ms(), "config_error");
        return 2;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        if (!s.out.empty()) s.log_stage(stage_name, elapsed_ms(), "invariant_violation");
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (!s.out.empty()) s.log_stage(stage_name, elapsed_ms(), "error");
        return 3;
    }
}
