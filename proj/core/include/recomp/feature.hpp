#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recomp/mb_types.hpp"

namespace recomp {

/// MBM equality: both components of (type, vectors) must match, except that
/// skipped and intra macroblocks carry no meaningful vector data, so their
/// vector lists are not compared.
bool mbm_equal(const MacroblockMode& a, const MacroblockMode& b);

/// The instability indicator: 0 when the MBMs match (stable), 1 otherwise.
int indicator(const MacroblockMode& a, const MacroblockMode& b);

/// Average number of unstable macroblocks per P-frame between two
/// consecutive generations. Frames are paired by index; the P-frame set is
/// taken from gen_a, and N is its size.
///
/// Throws FrameCountMismatch / DimensionMismatch when the generations do
/// not line up, NoPFrames when gen_a has no P-frames.
double compute_vi(std::span<const FrameGrid> gen_a, std::span<const FrameGrid> gen_b);

class FeatureVector;

/// values[i] = compute_vi(generations[i], generations[i+1]) for i in 0..n-1.
FeatureVector compute_feature_vector(const std::vector<std::vector<FrameGrid>>& generations,
                                     int n);

class FeatureScaler;

class FeatureVector {
public:
    std::vector<double> values;
    bool scaled = false;
    std::optional<int> label; // 0 original, 1 double, 2 triple

    size_t size() const { return values.size(); }
};

/// Per-dimension standardization fitted on a training set: center by mean,
/// divide by standard deviation (unit spread for constant dimensions).
class FeatureScaler {
public:
    std::vector<double> location;
    std::vector<double> spread;
    std::string method = "standard";

    size_t dims() const { return location.size(); }

    FeatureVector apply(const FeatureVector& v) const;
    FeatureVector invert(const FeatureVector& v) const;
};

FeatureScaler fit_scaler(std::span<const FeatureVector> training);
FeatureVector apply_scaler(const FeatureScaler& scaler, const FeatureVector& v);

/// Feature CSV: header `label,v0,v1[,v2]`, decimals with 6 fractional
/// digits, empty label field for unlabeled vectors.
std::string feature_csv_header(int n);
std::string feature_csv_row(const FeatureVector& v);
void write_feature_csv(std::ostream& out, std::span<const FeatureVector> rows);
std::vector<FeatureVector> read_feature_csv(std::istream& in);

} // namespace recomp
