#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recomp/feature.hpp"

namespace recomp {

struct SvmParams {
    double c = 1.0;          // soft-margin weight
    double gamma = 1.0;      // RBF width
    double tolerance = 1e-3; // KKT violation threshold
    long max_passes = 1'000'000; // SMO pair-update limit

    void validate() const;
};

/// exp(-gamma * |x - y|^2)
double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

/// One trained binary separator. Decision value
///   f(x) = sum_i dual_coefs[i] * K(sv_i, x) + bias,
/// f > 0 predicts label_pos, f < 0 label_neg, f == 0 the smaller label.
/// label_pos < label_neg always holds.
struct BinarySvm {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> dual_coefs; // alpha_i * y_i, nonzero
    double bias = 0.0;
    int label_pos = 0;
    int label_neg = 1;
    bool converged = true;

    double decision(std::span<const double> x, double gamma) const;
    int predict(std::span<const double> x, double gamma) const;
};

/// Binary or one-vs-one multiclass model. For two classes there is exactly
/// one sub-model and predict reduces to its decision sign.
struct SvmModel {
    SvmParams params;
    std::vector<int> classes; // ascending
    std::vector<BinarySvm> sub_models;
    std::optional<FeatureScaler> scaler;

    bool converged() const;
    bool is_binary() const { return classes.size() == 2; }

    /// Decision value of the single binary separator (binary models only).
    double decision_value(std::span<const double> x) const;

    /// Majority vote across sub-models; vote ties break by largest summed
    /// signed margin, then by smaller label. Enforces the scaling contract:
    /// a model with a scaler only accepts scaled inputs and vice versa.
    int predict(const FeatureVector& x) const;
};

/// Train a soft-margin binary SVM with SMO. `labels` must contain both -1
/// and +1. Exhausting max_passes returns the best-so-far model with
/// converged=false instead of failing.
BinarySvm train_binary_raw(std::span<const std::vector<double>> samples,
                           std::span<const int> labels, const SvmParams& params);

/// Wrapper producing a full SvmModel with classes {neg_label→-1, pos_label→+1}
/// drawn from the two distinct values in `labels` (smaller label becomes +1).
SvmModel train_binary(std::span<const std::vector<double>> samples, std::span<const int> labels,
                      const SvmParams& params);

/// One-vs-one across however many distinct labels are present (2 behaves
/// exactly like train_binary).
SvmModel train_multiclass(std::span<const std::vector<double>> samples,
                          std::span<const int> labels, const SvmParams& params);

struct GridSearchResult {
    SvmParams best_params;
    double cv_accuracy = 0.0;
    std::vector<double> fold_scores;                     // for best_params
    std::vector<std::tuple<double, double, double>> search_log; // (C, gamma, score)
    uint64_t seed = 0;
    bool any_nonconverged = false;
};

/// The standard coarse log-spaced grids: C = 2^-5 .. 2^15, gamma = 2^-15 .. 2^3,
/// step 2^2.
std::vector<double> default_c_grid();
std::vector<double> default_gamma_grid();

/// Exhaustive (C, gamma) search scored by stratified k-fold cross-validation
/// with a deterministic seeded fold assignment. Ties break toward smaller C,
/// then smaller gamma.
GridSearchResult grid_search(std::span<const std::vector<double>> samples,
                             std::span<const int> labels, std::span<const double> c_grid,
                             std::span<const double> gamma_grid, int folds, uint64_t seed,
                             const SvmParams& base = {});

/// Deterministic stratified fold assignment (exposed for tests and reports).
std::vector<int> stratified_folds(std::span<const int> labels, int folds, uint64_t seed);

void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);
std::string model_to_string(const SvmModel& model);
SvmModel model_from_string(std::string_view text);

} // namespace recomp
