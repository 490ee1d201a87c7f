#include "recomp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "recomp/cache.hpp"
#include "recomp/errors.hpp"
#include "recomp/ladder.hpp"

namespace recomp {

namespace fs = std::filesystem;

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

DatasetManifest synthesize_corpus(const CodecTool& tool, const fs::path& out_dir,
                                  const CorpusSpec& spec) {
    const fs::path clip_dir = out_dir / "clips";
    fs::create_directories(clip_dir);

    DatasetManifest manifest;
    manifest.provenance.push_back("synthesized corpus, seed " + std::to_string(spec.seed));
    manifest.provenance.push_back("encode: " + spec.encode.to_string());
    manifest.provenance.push_back("tool: " + tool.version());
    manifest.provenance.push_back(std::to_string(spec.frames) + " frames @ " +
                                  std::to_string(spec.fps) + " fps per clip");

    for (const auto& [width, height] : spec.resolutions) {
        const std::string tag = resolution_tag(width, height);
        for (const auto& [cls, count] : spec.counts) {
            const int encodes = static_cast<int>(cls) + 1; // original=1, double=2, triple=3
            const int train_count =
                static_cast<int>(spec.train_fraction * count + 0.5);
            for (int i = 0; i < count; ++i) {
                const uint64_t clip_seed =
                    splitmix64(spec.seed ^ splitmix64((static_cast<uint64_t>(width) << 40) ^
                                                      (static_cast<uint64_t>(cls) << 20) ^
                                                      static_cast<uint64_t>(i)));
                char name[96];
                snprintf(name, sizeof name, "%s_%dx%d_%03d.mp4", video_class_name(cls), width,
                         height, i);
                const fs::path clip = clip_dir / name;

                fs::path current = clip_dir / (std::string(name) + ".gen.tmp.mp4");
                tool.synthesize_clip(current, width, height, spec.frames, spec.fps, clip_seed,
                                     spec.encode);
                for (int e = 1; e < encodes; ++e) {
                    const fs::path next = clip_dir / (std::string(name) + ".re.tmp.mp4");
                    tool.recompress(current, spec.encode, next);
                    fs::rename(next, current);
                }
                fs::rename(current, clip);

                ManifestEntry entry;
                entry.path = clip;
                entry.label = cls;
                entry.resolution = tag;
                entry.split = i < train_count ? Split::Train : Split::Predict;
                manifest.entries.push_back(std::move(entry));
            }
        }
    }
    manifest.save(out_dir / "manifest.csv");
    return manifest;
}

FeatureTable extract_corpus_features(const CodecTool& tool, const DatasetManifest& manifest,
                                     const ExtractOptions& options) {
    FeatureTable table;
    table.rows.resize(manifest.entries.size());

    std::optional<FeatureCache> cache;
    if (!options.cache_dir.empty()) cache.emplace(options.cache_dir);

    const fs::path work =
        options.work_dir.empty() ? fs::temp_directory_path() / "recomp-ladders" : options.work_dir;
    fs::create_directories(work);

    // pin the tool version once up front so workers never race the probe
    const std::string tool_version = tool.version();

    std::mutex failures_mutex;
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= manifest.entries.size()) return;
            const ManifestEntry& entry = manifest.entries[i];
            try {
                std::string key;
                if (cache) {
                    key = FeatureCache::key_for(sha256_file_hex(entry.path), options.n,
                                                options.encode, tool_version);
                    if (auto hit = cache->lookup(key)) {
                        hit->label = static_cast<int>(entry.label);
                        table.rows[i] = std::move(*hit);
                        continue;
                    }
                }
                const fs::path ladder_dir =
                    work / ("ladder-" + sha256_hex(entry.path.string()).substr(0, 16) + "-" +
                            std::to_string(i));
                RecompressionLadder ladder =
                    build_ladder(tool, entry.path, options.n, options.encode, ladder_dir);
                FeatureVector fv;
                try {
                    fv = compute_feature_vector(ladder_grids(tool, ladder), options.n);
                } catch (...) {
                    if (!options.keep_ladders) delete_ladder(ladder);
                    throw;
                }
                if (!options.keep_ladders) delete_ladder(ladder);
                fv.label = static_cast<int>(entry.label);
                if (cache) cache->store(key, fv);
                table.rows[i] = std::move(fv);
            } catch (const std::exception& e) {
                std::lock_guard lock(failures_mutex);
                table.failures.emplace_back(entry.path, e.what());
            }
        }
    };

    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // deterministic failure order regardless of worker scheduling
    std::sort(table.failures.begin(), table.failures.end());
    return table;
}

namespace {

// the binary experiment groups every recompressed clip against originals
int effective_label(VideoClass cls, bool binary) {
    if (binary) return cls == VideoClass::Original ? 0 : 1;
    return static_cast<int>(cls);
}

} // namespace

EvaluationReport evaluate_features(const DatasetManifest& manifest, const FeatureTable& table,
                                   const ExperimentConfig& config, SvmModel* model_out) {
    if (table.rows.size() != manifest.entries.size())
        throw Error(Errc::LengthMismatch, "feature table does not match manifest");
    const bool binary = config.n <= 2;

    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    std::vector<const FeatureVector*> predict_x;
    std::vector<int> predict_y;
    for (size_t i = 0; i < manifest.entries.size(); ++i) {
        const ManifestEntry& e = manifest.entries[i];
        if (!config.resolution_filter.empty() && e.resolution != config.resolution_filter)
            continue;
        if (!table.rows[i]) continue;
        if (e.split == Split::Train) {
            train_x.push_back(table.rows[i]->values);
            train_y.push_back(effective_label(e.label, binary));
        } else {
            predict_x.push_back(&*table.rows[i]);
            predict_y.push_back(effective_label(e.label, binary));
        }
    }

    {
        std::set<int> classes(train_y.begin(), train_y.end());
        if (classes.size() < 2)
            throw Error(Errc::InsufficientTrainingData,
                        "train split has " + std::to_string(classes.size()) +
                            " class(es) after filtering");
    }

    EvaluationReport report;
    report.n = config.n;
    report.scaled = config.scaled;
    report.resolution_filter = config.resolution_filter;
    report.seed = config.seed;
    report.failures = table.failures;

    std::optional<FeatureScaler> scaler;
    if (config.scaled) {
        std::vector<FeatureVector> train_fvs(train_x.size());
        for (size_t i = 0; i < train_x.size(); ++i) train_fvs[i].values = train_x[i];
        scaler = fit_scaler(train_fvs);
        for (auto& x : train_x) {
            FeatureVector fv;
            fv.values = x;
            x = scaler->apply(fv).values;
        }
    }

    const auto t_grid = std::chrono::steady_clock::now();
    GridSearchResult search = grid_search(train_x, train_y, config.c_grid, config.gamma_grid,
                                          config.folds, config.seed);
    report.timings_s["grid_search"] = seconds_since(t_grid);
    report.best_params = search.best_params;
    report.cv_accuracy = search.cv_accuracy;

    const auto t_train = std::chrono::steady_clock::now();
    SvmModel model = train_multiclass(train_x, train_y, search.best_params);
    model.scaler = scaler;
    report.timings_s["train"] = seconds_since(t_train);

    report.classes = model.classes;
    const size_t k = report.classes.size();
    report.confusion.assign(k, std::vector<int>(k, 0));

    const auto t_predict = std::chrono::steady_clock::now();
    for (size_t i = 0; i < predict_x.size(); ++i) {
        FeatureVector fv = *predict_x[i];
        if (scaler) fv = scaler->apply(fv);
        const int predicted = model.predict(fv);
        size_t ti = 0, pi = 0;
        for (size_t c = 0; c < k; ++c) {
            if (report.classes[c] == predict_y[i]) ti = c;
            if (report.classes[c] == predicted) pi = c;
        }
        report.confusion[ti][pi] += 1;
    }
    report.timings_s["predict"] = seconds_since(t_predict);

    report.predict_total = static_cast<int>(predict_x.size());
    int correct = 0;
    report.per_class_recall.assign(k, 0.0);
    for (size_t c = 0; c < k; ++c) {
        int row_total = 0;
        for (size_t p = 0; p < k; ++p) row_total += report.confusion[c][p];
        correct += report.confusion[c][c];
        report.per_class_recall[c] =
            row_total > 0 ? static_cast<double>(report.confusion[c][c]) / row_total : 0.0;
    }
    report.accuracy =
        report.predict_total > 0 ? static_cast<double>(correct) / report.predict_total : 0.0;

    if (model_out) *model_out = std::move(model);
    return report;
}

EvaluationReport run_experiment(const CodecTool& tool, const DatasetManifest& manifest,
                                const ExperimentConfig& config, SvmModel* model_out) {
    ExperimentConfig cfg = config;
    cfg.extract.n = config.n;
    const auto t_extract = std::chrono::steady_clock::now();
    FeatureTable table = extract_corpus_features(tool, manifest, cfg.extract);
    const double extract_s = seconds_since(t_extract);
    EvaluationReport report = evaluate_features(manifest, table, cfg, model_out);
    report.timings_s["extract"] = extract_s;
    return report;
}

namespace {

std::string class_display(int label, bool binary) {
    if (binary) return label == 0 ? "original" : "recompressed";
    switch (label) {
    case 0: return "original";
    case 1: return "double";
    case 2: return "triple";
    default: return "class" + std::to_string(label);
    }
}

} // namespace

std::string render_report_text(const EvaluationReport& report) {
    std::ostringstream out;
    char buf[160];
    const bool binary = report.n <= 2;
    out << "experiment: n=" << report.n << " " << (report.scaled ? "scaled" : "non-scaled")
        << " resolution=" << (report.resolution_filter.empty() ? "MIX" : report.resolution_filter)
        << " seed=" << report.seed << "\n";
    snprintf(buf, sizeof buf, "grid search: C=%.17g gamma=%.17g cv_accuracy=%.4f\n",
             report.best_params.c, report.best_params.gamma, report.cv_accuracy);
    out << buf;
    out << "\nconfusion matrix (rows = true class, columns = predicted):\n";
    out << "  " << std::string(14, ' ');
    for (int c : report.classes) {
        snprintf(buf, sizeof buf, "%14s", class_display(c, binary).c_str());
        out << buf;
    }
    out << "\n";
    for (size_t t = 0; t < report.classes.size(); ++t) {
        snprintf(buf, sizeof buf, "  %-14s", class_display(report.classes[t], binary).c_str());
        out << buf;
        for (size_t p = 0; p < report.classes.size(); ++p) {
            snprintf(buf, sizeof buf, "%14d", report.confusion[t][p]);
            out << buf;
        }
        snprintf(buf, sizeof buf, "  recall %.4f\n", report.per_class_recall[t]);
        out << buf;
    }
    snprintf(buf, sizeof buf, "\npredict videos: %d\naccuracy: %.4f (%.2f%%)\n",
             report.predict_total, report.accuracy, report.accuracy * 100.0);
    out << buf;
    if (!report.failures.empty()) {
        out << "\nexcluded videos (extraction failed):\n";
        for (const auto& [path, why] : report.failures)
            out << "  " << path.string() << ": " << why << "\n";
    }
    return std::move(out).str();
}

std::string render_report_csv(const EvaluationReport& report) {
    std::ostringstream out;
    char buf[160];
    out << "key,value\n";
    out << "n," << report.n << "\n";
    out << "scaled," << (report.scaled ? 1 : 0) << "\n";
    out << "resolution," << (report.resolution_filter.empty() ? "MIX" : report.resolution_filter)
        << "\n";
    out << "seed," << report.seed << "\n";
    snprintf(buf, sizeof buf, "best_c,%.17g\n", report.best_params.c);
    out << buf;
    snprintf(buf, sizeof buf, "best_gamma,%.17g\n", report.best_params.gamma);
    out << buf;
    snprintf(buf, sizeof buf, "cv_accuracy,%.6f\n", report.cv_accuracy);
    out << buf;
    snprintf(buf, sizeof buf, "accuracy,%.6f\n", report.accuracy);
    out << buf;
    out << "predict_total," << report.predict_total << "\n";
    out << "excluded," << report.failures.size() << "\n";
    const bool binary = report.n <= 2;
    for (size_t t = 0; t < report.classes.size(); ++t)
        for (size_t p = 0; p < report.classes.size(); ++p)
            out << "confusion_" << class_display(report.classes[t], binary) << "_"
                << class_display(report.classes[p], binary) << "," << report.confusion[t][p]
                << "\n";
    for (size_t t = 0; t < report.classes.size(); ++t) {
        snprintf(buf, sizeof buf, "recall_%s,%.6f\n",
                 class_display(report.classes[t], binary).c_str(), report.per_class_recall[t]);
        out << buf;
    }
    return std::move(out).str();
}

std::string render_timings_csv(const EvaluationReport& report) {
    std::ostringstream out;
    out << "stage,seconds\n";
    char buf[96];
    for (const auto& [stage, secs] : report.timings_s) {
        snprintf(buf, sizeof buf, "%s,%.3f\n", stage.c_str(), secs);
        out << buf;
    }
    return std::move(out).str();
}

void write_report_files(const fs::path& dir, const EvaluationReport& report,
                        const DatasetManifest* manifest, const FeatureTable* table) {
    fs::create_directories(dir);
    auto write = [&](const char* name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error(Errc::Io, "cannot write " + (dir / name).string());
        out << content;
    };
    write("report.txt", render_report_text(report));
    write("report.csv", render_report_csv(report));
    write("timings.csv", render_timings_csv(report));
    if (manifest && table) {
        std::vector<FeatureVector> rows;
        for (size_t i = 0; i < table->rows.size(); ++i)
            if (table->rows[i]) rows.push_back(*table->rows[i]);
        std::ofstream out(dir / "features.csv", std::ios::binary);
        if (!out) throw Error(Errc::Io, "cannot write features.csv");
        write_feature_csv(out, rows);
    }
}

} // namespace recomp
