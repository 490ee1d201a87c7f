// recomp: H.264 recompression detection from macroblock-mode stability.
//
// Subcommands: ladder, extract, train, predict, evaluate, synthesize.
// stdout carries only data (CSV / JSON / verdicts / paths); diagnostics go
// to stderr. Exit codes: 0 success, 1 analysis error, 2 usage or I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "recomp/cache.hpp"
#include "recomp/config.hpp"
#include "recomp/errors.hpp"
#include "recomp/harness.hpp"
#include "recomp/ladder.hpp"
#include "recomp/svm.hpp"

namespace fs = std::filesystem;
using recomp::Errc;
using recomp::Error;

namespace {

int exit_code_for(Errc code) {
    switch (code) {
    case Errc::FileNotFound:
    case Errc::NotAVideo:
    case Errc::UnsupportedCodec:
    case Errc::Io:
        return 2;
    default:
        return 1;
    }
}

struct Session {
    recomp::CliConfig config;
    recomp::CodecTool tool() const { return recomp::CodecTool::locate(config.codec_tool); }
};

std::string class_display(int label, bool binary) {
    if (binary) return label == 0 ? "original" : "recompressed";
    switch (label) {
    case 0: return "original";
    case 1: return "double";
    case 2: return "triple";
    default: return "class" + std::to_string(label);
    }
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            grid.push_back(std::stod(field));
        } catch (const std::exception&) {
            throw Error(Errc::Grammar, "bad grid value '" + field + "'");
        }
    }
    if (grid.empty()) throw Error(Errc::Grammar, "empty parameter grid");
    return grid;
}

// scoped temp ladder for extract/predict on a bare video
struct ScopedLadder {
    recomp::RecompressionLadder ladder;
    bool keep = false;
    ~ScopedLadder() {
        if (!keep) recomp::delete_ladder(ladder);
    }
};

recomp::FeatureVector extract_one(const recomp::CodecTool& tool, const fs::path& input, int n,
                                  const recomp::EncodeConfig& encode, bool keep) {
    if (fs::is_directory(input)) {
        recomp::RecompressionLadder ladder = recomp::load_ladder(input);
        if (ladder.n < n)
            throw Error(Errc::LengthMismatch,
                        "ladder has n=" + std::to_string(ladder.n) + ", need " +
                            std::to_string(n));
        return recomp::compute_feature_vector(recomp::ladder_grids(tool, ladder), n);
    }
    const fs::path dir =
        fs::temp_directory_path() /
        ("recomp-extract-" + recomp::sha256_hex(fs::absolute(input).string()).substr(0, 12) +
         "-" + std::to_string(::getpid()));
    ScopedLadder scoped{recomp::build_ladder(tool, input, n, encode, dir), keep};
    if (keep) fprintf(stderr, "ladder kept at %s\n", dir.string().c_str());
    return recomp::compute_feature_vector(recomp::ladder_grids(tool, scoped.ladder), n);
}

int cmd_ladder(const Session& s, const fs::path& input, int n, fs::path out_dir) {
    if (out_dir.empty()) out_dir = input.string() + ".ladder";
    recomp::CodecTool tool = s.tool();
    recomp::RecompressionLadder ladder =
        recomp::build_ladder(tool, input, n, s.config.encode, out_dir);
    printf("%s\n", fs::absolute(ladder.dir).string().c_str());
    return 0;
}

int cmd_extract(const Session& s, const fs::path& input, int n) {
    recomp::CodecTool tool = s.tool();
    recomp::FeatureVector fv = extract_one(tool, input, n, s.config.encode, s.config.keep);
    printf("%s\n", recomp::feature_csv_header(n).c_str());
    printf("%s\n", recomp::feature_csv_row(fv).c_str());
    return 0;
}

int cmd_train(const Session& s, const fs::path& features_path, const fs::path& model_path,
              bool scaled, int folds, const std::string& c_grid_csv,
              const std::string& gamma_grid_csv) {
    std::ifstream in(features_path);
    if (!in) throw Error(Errc::FileNotFound, features_path.string());
    std::vector<recomp::FeatureVector> rows = recomp::read_feature_csv(in);
    if (rows.empty()) throw Error(Errc::EmptyTrainingSet, "no feature rows in CSV");

    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (const recomp::FeatureVector& fv : rows) {
        if (!fv.label)
            throw Error(Errc::InsufficientTrainingData, "training rows must carry labels");
        x.push_back(fv.values);
        y.push_back(*fv.label);
    }

    std::optional<recomp::FeatureScaler> scaler;
    if (scaled) {
        scaler = recomp::fit_scaler(rows);
        for (size_t i = 0; i < x.size(); ++i) {
            recomp::FeatureVector fv;
            fv.values = x[i];
            x[i] = scaler->apply(fv).values;
        }
    }

    const std::vector<double> c_grid =
        c_grid_csv.empty() ? recomp::default_c_grid() : parse_grid(c_grid_csv);
    const std::vector<double> gamma_grid =
        gamma_grid_csv.empty() ? recomp::default_gamma_grid() : parse_grid(gamma_grid_csv);

    recomp::GridSearchResult search =
        recomp::grid_search(x, y, c_grid, gamma_grid, folds, s.config.seed);
    fprintf(stderr, "grid search: best C=%g gamma=%g cv_accuracy=%.4f (%zu cells, seed %llu)\n",
            search.best_params.c, search.best_params.gamma, search.cv_accuracy,
            search.search_log.size(), static_cast<unsigned long long>(search.seed));
    if (search.any_nonconverged)
        fprintf(stderr, "warning: some grid cells hit the SMO pass limit\n");

    recomp::SvmModel model = recomp::train_multiclass(x, y, search.best_params);
    model.scaler = scaler;
    recomp::save_model(model, model_path);
    printf("%s\n", fs::absolute(model_path).string().c_str());
    return 0;
}

int cmd_predict(const Session& s, const fs::path& model_path, const fs::path& input) {
    recomp::SvmModel model = recomp::load_model(model_path);
    const int n = model.sub_models.empty() || model.sub_models.front().support_vectors.empty()
                      ? 2
                      : static_cast<int>(model.sub_models.front().support_vectors.front().size());

    recomp::CodecTool tool = s.tool();
    recomp::FeatureVector raw = extract_one(tool, input, n, s.config.encode, s.config.keep);
    recomp::FeatureVector fv = model.scaler ? model.scaler->apply(raw) : raw;
    const int label = model.predict(fv);
    const bool binary = model.classes.size() == 2 && model.classes[0] == 0 &&
                        model.classes[1] == 1 && n == 2;
    const std::string name = class_display(label, binary);

    if (s.config.json) {
        nlohmann::json out;
        out["class"] = name;
        out["label"] = label;
        out["features"] = raw.values;
        out["n"] = n;
        out["scaled"] = model.scaler.has_value();
        out["model"] = fs::absolute(model_path).string();
        out["input"] = fs::absolute(input).string();
        printf("%s\n", out.dump().c_str());
    } else {
        std::string feats;
        char buf[48];
        for (size_t i = 0; i < raw.values.size(); ++i) {
            snprintf(buf, sizeof buf, "%sv%zu=%.6f", i ? " " : "", i, raw.values[i]);
            feats += buf;
        }
        printf("%s (%s)\n", name.c_str(), feats.c_str());
    }
    return 0;
}

int cmd_evaluate(const Session& s, const fs::path& manifest_path, int n, bool scaled,
                 const std::string& resolution, fs::path out_dir, int folds) {
    recomp::DatasetManifest manifest = recomp::DatasetManifest::load(manifest_path);
    recomp::CodecTool tool = s.tool();

    recomp::ExperimentConfig config;
    config.n = n;
    config.scaled = scaled;
    config.resolution_filter = resolution == "MIX" ? "" : resolution;
    config.folds = folds;
    config.seed = s.config.seed;
    config.extract.n = n;
    config.extract.encode = s.config.encode;
    config.extract.jobs = s.config.jobs;
    config.extract.keep_ladders = false;

    // one experiment directory per configuration digest
    std::ostringstream key;
    key << recomp::sha256_file_hex(manifest_path) << '\n'
        << n << '\n' << scaled << '\n' << config.resolution_filter << '\n' << config.folds
        << '\n' << config.seed << '\n' << s.config.encode.to_string() << '\n';
    const std::string digest = recomp::sha256_hex(key.str()).substr(0, 12);
    if (out_dir.empty()) out_dir = fs::path("recomp-experiments") / ("exp-" + digest);
    fs::create_directories(out_dir);
    config.extract.cache_dir = out_dir / "cache";
    config.extract.work_dir = out_dir / "work";

    recomp::FeatureTable table = recomp::extract_corpus_features(tool, manifest, config.extract);
    recomp::EvaluationReport report = recomp::evaluate_features(manifest, table, config);
    recomp::write_report_files(out_dir, report, &manifest, &table);
    for (const auto& [path, why] : report.failures)
        fprintf(stderr, "excluded %s: %s\n", path.string().c_str(), why.c_str());
    fprintf(stderr, "report written to %s\n", fs::absolute(out_dir).string().c_str());
    fputs(recomp::render_report_text(report).c_str(), stdout);
    return 0;
}

int cmd_synthesize(const Session& s, fs::path out_dir, int originals, int doubles, int triples,
                   const std::vector<std::string>& resolutions, int frames, int fps,
                   double train_fraction) {
    recomp::CorpusSpec spec;
    spec.counts[recomp::VideoClass::Original] = originals;
    spec.counts[recomp::VideoClass::DoubleCompressed] = doubles;
    if (triples > 0) spec.counts[recomp::VideoClass::TripleCompressed] = triples;
    spec.resolutions.clear();
    for (const std::string& r : resolutions) {
        size_t x = r.find('x');
        if (x == std::string::npos)
            throw Error(Errc::Grammar, "bad resolution '" + r + "', want WIDTHxHEIGHT");
        spec.resolutions.emplace_back(std::stoi(r.substr(0, x)), std::stoi(r.substr(x + 1)));
    }
    spec.seed = s.config.seed;
    spec.frames = frames;
    spec.fps = fps;
    spec.train_fraction = train_fraction;
    spec.encode = s.config.encode;

    recomp::CodecTool tool = s.tool();
    recomp::synthesize_corpus(tool, out_dir, spec);
    printf("%s\n", fs::absolute(out_dir / "manifest.csv").string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"H.264 recompression detector (macroblock-mode stability + SVM)"};
    app.require_subcommand(0, 1);

    std::string config_file;
    int quality = 0, gop = 0, bframes = -1, jobs = 0;
    std::string preset, codec_tool;
    uint64_t seed = 0;
    bool keep = false, json = false, show_config = false;
    app.add_option("--config", config_file, "key=value config file");
    app.add_option("--codec-tool", codec_tool, "path to the codec driver executable");
    app.add_option("--quality", quality, "constant quality scale (CRF)")->check(CLI::Range(0, 51));
    app.add_option("--gop", gop, "GOP length for re-encodes")->check(CLI::PositiveNumber);
    app.add_option("--bframes", bframes, "B-frames per GOP")->check(CLI::Range(0, 8));
    app.add_option("--preset", preset, "encoder preset");
    app.add_option("--jobs", jobs, "parallel workers for corpus extraction")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "seed for corpus synthesis and fold assignment");
    app.add_flag("--keep", keep, "keep intermediate ladder directories");
    app.add_flag("--json", json, "machine-readable JSON output where applicable");
    app.add_flag("--show-config", show_config, "print the effective configuration and exit");

    fs::path in_path, out_path, model_path;
    int n = 2;
    auto* ladder = app.add_subcommand("ladder", "build a recompression ladder directory");
    ladder->add_option("input", in_path, "suspect video")->required();
    ladder->add_option("-n,--recompressions", n, "number of re-encodes");
    ladder->add_option("--out", out_path, "ladder directory (default <input>.ladder)");

    auto* extract = app.add_subcommand("extract", "extract the feature vector of one video");
    extract->add_option("input", in_path, "video file or ladder directory")->required();
    extract->add_option("-n,--recompressions", n, "feature vector length");

    bool scaled = false;
    int folds = 5;
    std::string c_grid, gamma_grid, resolution = "MIX";
    auto* train = app.add_subcommand("train", "grid-search and train an SVM from a feature CSV");
    train->add_option("features", in_path, "labeled feature CSV")->required();
    train->add_option("--out", model_path, "model file")->required();
    train->add_flag("--scaled", scaled, "standardize features before training");
    train->add_option("--folds", folds, "cross-validation folds")->check(CLI::Range(2, 20));
    train->add_option("--c-grid", c_grid, "comma-separated C grid");
    train->add_option("--gamma-grid", gamma_grid, "comma-separated gamma grid");

    auto* predict = app.add_subcommand("predict", "classify one video with a trained model");
    predict->add_option("--model", model_path, "model file")->required();
    predict->add_option("input", in_path, "video file or ladder directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "run a train/predict experiment on a manifest");
    evaluate->add_option("manifest", in_path, "dataset manifest CSV")->required();
    evaluate->add_option("-n,--recompressions", n, "2 = binary, 3 = three-class");
    evaluate->add_flag("--scaled", scaled, "standardize features");
    evaluate->add_option("--resolution", resolution, "resolution tag filter or MIX");
    evaluate->add_option("--out", out_path, "experiment directory");
    evaluate->add_option("--folds", folds, "cross-validation folds")->check(CLI::Range(2, 20));

    int originals = 10, doubles = 10, triples = 0, frames = 60, fps = 30;
    double train_fraction = 0.6;
    std::vector<std::string> resolutions{"320x240"};
    auto* synthesize = app.add_subcommand("synthesize", "generate a labeled corpus");
    synthesize->add_option("--out", out_path, "corpus directory")->required();
    synthesize->add_option("--originals", originals, "original clips per resolution");
    synthesize->add_option("--double", doubles, "double-compressed clips per resolution");
    synthesize->add_option("--triple", triples, "triple-compressed clips per resolution");
    synthesize->add_option("--resolution", resolutions, "WIDTHxHEIGHT (repeatable)");
    synthesize->add_option("--frames", frames, "frames per clip");
    synthesize->add_option("--fps", fps, "frame rate");
    synthesize->add_option("--train-fraction", train_fraction, "share of clips marked train")
        ->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    try {
        Session session;
        if (!config_file.empty()) session.config.load_file(config_file);
        session.config.load_env();
        if (app.count("--quality")) session.config.set_quality(quality);
        if (app.count("--gop")) session.config.set_gop(gop);
        if (app.count("--bframes")) session.config.set_bframes(bframes);
        if (app.count("--preset")) session.config.set_preset(preset);
        if (app.count("--codec-tool")) session.config.set_codec_tool(codec_tool);
        if (app.count("--jobs")) session.config.set_jobs(jobs);
        if (app.count("--seed")) session.config.set_seed(seed);
        if (app.count("--keep")) session.config.set_keep(keep);
        if (app.count("--json")) session.config.set_json(json);

        if (show_config) {
            std::ostringstream out;
            session.config.print_effective(out);
            fputs(out.str().c_str(), stdout);
            return 0;
        }
        if (app.get_subcommands().empty()) {
            fprintf(stderr, "error: a subcommand is required (see --help)\n");
            return 2;
        }

        if (ladder->parsed()) return cmd_ladder(session, in_path, n, out_path);
        if (extract->parsed()) return cmd_extract(session, in_path, n);
        if (train->parsed())
            return cmd_train(session, in_path, model_path, scaled, folds, c_grid, gamma_grid);
        if (predict->parsed()) return cmd_predict(session, model_path, in_path);
        if (evaluate->parsed())
            return cmd_evaluate(session, in_path, n, scaled, resolution, out_path, folds);
        if (synthesize->parsed())
            return cmd_synthesize(session, out_path, originals, doubles, triples, resolutions,
                                  frames, fps, train_fraction);
        return 2;
    } catch (const Error& e) {
        fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
