#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recomp/codec_tool.hpp"
#include "recomp/dataset.hpp"
#include "recomp/feature.hpp"
#include "recomp/svm.hpp"

namespace recomp {

struct CorpusSpec {
    std::map<VideoClass, int> counts; // clips per class, per resolution
    std::vector<std::pair<int, int>> resolutions = {{320, 240}};
    uint64_t seed = 1;
    int frames = 60;
    int fps = 30;
    double train_fraction = 0.6;
    EncodeConfig encode;
};

/// Generate seeded procedural clips, re-encode them per class (original = 1
/// encode, double = 2, triple = 3, all at the same quality scale), and write
/// clips + manifest under out_dir. Deterministic for a fixed spec.
DatasetManifest synthesize_corpus(const CodecTool& tool, const std::filesystem::path& out_dir,
                                  const CorpusSpec& spec);

struct FeatureTable {
    // aligned with the manifest entries it was extracted from
    std::vector<std::optional<FeatureVector>> rows;
    std::vector<std::pair<std::filesystem::path, std::string>> failures;
};

struct ExtractOptions {
    int n = 2;
    EncodeConfig encode;
    std::filesystem::path cache_dir; // empty = no caching
    std::filesystem::path work_dir;  // ladder scratch space; empty = system temp
    int jobs = 1;
    bool keep_ladders = false;
};

/// One feature vector per manifest entry (label filled from the manifest).
/// Per-video failures are collected, not fatal. Results are cached by
/// (video digest, n, encode config, tool version) when a cache dir is set.
FeatureTable extract_corpus_features(const CodecTool& tool, const DatasetManifest& manifest,
                                     const ExtractOptions& options);

struct ExperimentConfig {
    int n = 2;              // 2 = binary experiment, 3 = three-class
    bool scaled = false;
    std::string resolution_filter; // empty = all resolutions mixed
    std::vector<double> c_grid = default_c_grid();
    std::vector<double> gamma_grid = default_gamma_grid();
    int folds = 5;
    uint64_t seed = 1;
    ExtractOptions extract;
};

struct EvaluationReport {
    std::vector<int> classes;
    std::vector<std::vector<int>> confusion; // [true][predicted]
    double accuracy = 0.0;
    std::vector<double> per_class_recall;
    int predict_total = 0;

    int n = 2;
    bool scaled = false;
    std::string resolution_filter;
    SvmParams best_params;
    double cv_accuracy = 0.0;
    uint64_t seed = 0;

    std::vector<std::pair<std::filesystem::path, std::string>> failures;
    std::map<std::string, double> timings_s; // not part of deterministic artifacts
};

/// Classification stage only: split the feature table per the manifest,
/// fit scaler (train split only) when scaled, grid-search and train on the
/// train split, evaluate on the predict split.
EvaluationReport evaluate_features(const DatasetManifest& manifest, const FeatureTable& table,
                                   const ExperimentConfig& config, SvmModel* model_out = nullptr);

/// Full experiment: extraction + evaluation.
EvaluationReport run_experiment(const CodecTool& tool, const DatasetManifest& manifest,
                                const ExperimentConfig& config, SvmModel* model_out = nullptr);

/// Human-readable table for the report.
std::string render_report_text(const EvaluationReport& report);
/// Machine-readable CSV (deterministic; excludes timings).
std::string render_report_csv(const EvaluationReport& report);
/// Stage timings CSV (separate so the main artifacts stay reproducible).
std::string render_timings_csv(const EvaluationReport& report);

/// Write report.txt, report.csv, timings.csv (+ features.csv when table
/// given) under dir.
void write_report_files(const std::filesystem::path& dir, const EvaluationReport& report,
                        const DatasetManifest* manifest = nullptr,
                        const FeatureTable* table = nullptr);

} // namespace recomp
