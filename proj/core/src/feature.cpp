#include "recomp/feature.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "recomp/errors.hpp"

namespace recomp {

bool mbm_equal(const MacroblockMode& a, const MacroblockMode& b) {
    if (!(a.mb_type == b.mb_type)) return false;
    if (a.mb_type.is_skip() || a.mb_type.is_intra()) return true;
    return a.mvs == b.mvs;
}

int indicator(const MacroblockMode& a, const MacroblockMode& b) {
    return mbm_equal(a, b) ? 0 : 1;
}

double compute_vi(std::span<const FrameGrid> gen_a, std::span<const FrameGrid> gen_b) {
    if (gen_a.size() != gen_b.size())
        throw Error(Errc::FrameCountMismatch,
                    std::to_string(gen_a.size()) + " vs " + std::to_string(gen_b.size()) +
                        " frames");
    long p_frames = 0;
    long long unstable = 0;
    for (size_t k = 0; k < gen_a.size(); ++k) {
        const FrameGrid& fa = gen_a[k];
        const FrameGrid& fb = gen_b[k];
        if (fa.rows != fb.rows || fa.cols != fb.cols)
            throw Error(Errc::DimensionMismatch,
                        "frame " + std::to_string(k) + ": " + std::to_string(fa.rows) + "x" +
                            std::to_string(fa.cols) + " vs " + std::to_string(fb.rows) + "x" +
                            std::to_string(fb.cols));
        if (fa.frame_type != FrameType::P) continue;
        ++p_frames;
        for (size_t i = 0; i < fa.cells.size(); ++i)
            unstable += indicator(fa.cells[i], fb.cells[i]);
    }
    if (p_frames == 0) throw Error(Errc::NoPFrames, "generation has no P-frames");
    return static_cast<double>(unstable) / static_cast<double>(p_frames);
}

FeatureVector compute_feature_vector(const std::vector<std::vector<FrameGrid>>& generations,
                                     int n) {
    if (n < 1) throw Error(Errc::LengthMismatch, "n must be >= 1");
    if (generations.size() < static_cast<size_t>(n) + 1)
        throw Error(Errc::FrameCountMismatch,
                    "need " + std::to_string(n + 1) + " generations, have " +
                        std::to_string(generations.size()));
    FeatureVector v;
    v.values.reserve(n);
    for (int i = 0; i < n; ++i)
        v.values.push_back(compute_vi(generations[i], generations[i + 1]));
    return v;
}

FeatureVector FeatureScaler::apply(const FeatureVector& v) const {
    if (v.values.size() != dims())
        throw Error(Errc::LengthMismatch, std::to_string(v.values.size()) + "-dim vector vs " +
                                              std::to_string(dims()) + "-dim scaler");
    FeatureVector out = v;
    for (size_t d = 0; d < dims(); ++d) out.values[d] = (v.values[d] - location[d]) / spread[d];
    out.scaled = true;
    return out;
}

FeatureVector FeatureScaler::invert(const FeatureVector& v) const {
    if (v.values.size() != dims())
        throw Error(Errc::LengthMismatch, std::to_string(v.values.size()) + "-dim vector vs " +
                                              std::to_string(dims()) + "-dim scaler");
    FeatureVector out = v;
    for (size_t d = 0; d < dims(); ++d) out.values[d] = v.values[d] * spread[d] + location[d];
    out.scaled = false;
    return out;
}

FeatureScaler fit_scaler(std::span<const FeatureVector> training) {
    if (training.empty()) throw Error(Errc::EmptyTrainingSet, "no training vectors");
    const size_t dims = training.front().values.size();
    for (const FeatureVector& v : training)
        if (v.values.size() != dims)
            throw Error(Errc::LengthMismatch, "mixed vector lengths in training set");

    FeatureScaler s;
    s.location.assign(dims, 0.0);
    s.spread.assign(dims, 0.0);
    const double inv_n = 1.0 / static_cast<double>(training.size());
    for (const FeatureVector& v : training)
        for (size_t d = 0; d < dims; ++d) s.location[d] += v.values[d];
    for (size_t d = 0; d < dims; ++d) s.location[d] *= inv_n;
    for (const FeatureVector& v : training)
        for (size_t d = 0; d < dims; ++d) {
            const double diff = v.values[d] - s.location[d];
            s.spread[d] += diff * diff;
        }
    for (size_t d = 0; d < dims; ++d) {
        s.spread[d] = std::sqrt(s.spread[d] * inv_n);
        if (s.spread[d] == 0.0) s.spread[d] = 1.0; // constant dimension
    }
    return s;
}

FeatureVector apply_scaler(const FeatureScaler& scaler, const FeatureVector& v) {
    return scaler.apply(v);
}

std::string feature_csv_header(int n) {
    std::string h = "label";
    for (int i = 0; i < n; ++i) h += ",v" + std::to_string(i);
    return h;
}

std::string feature_csv_row(const FeatureVector& v) {
    std::string row = v.label ? std::to_string(*v.label) : "";
    char buf[32];
    for (double x : v.values) {
        snprintf(buf, sizeof buf, ",%.6f", x);
        row += buf;
    }
    return row;
}

void write_feature_csv(std::ostream& out, std::span<const FeatureVector> rows) {
    const int n = rows.empty() ? 2 : static_cast<int>(rows.front().values.size());
    out << feature_csv_header(n) << '\n';
    for (const FeatureVector& v : rows) out << feature_csv_row(v) << '\n';
}

std::vector<FeatureVector> read_feature_csv(std::istream& in) {
    std::vector<FeatureVector> rows;
    std::string line;
    long line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (!line.starts_with("label,"))
                throw Error(Errc::Grammar, line_no, "expected feature CSV header, got: " + line);
            header_seen = true;
            continue;
        }
        FeatureVector v;
        std::stringstream ss(line);
        std::string field;
        bool first = true;
        while (std::getline(ss, field, ',')) {
            if (first) {
                first = false;
                if (!field.empty()) v.label = std::stoi(field);
                continue;
            }
            try {
                size_t used = 0;
                double x = std::stod(field, &used);
                if (used != field.size()) throw std::invalid_argument(field);
                v.values.push_back(x);
            } catch (const std::exception&) {
                throw Error(Errc::Grammar, line_no, "bad feature value '" + field + "'");
            }
        }
        if (first) throw Error(Errc::Grammar, line_no, "empty feature row");
        // a trailing empty label with no values ("label-only" row) is malformed
        if (v.values.empty()) throw Error(Errc::Grammar, line_no, "feature row with no values");
        rows.push_back(std::move(v));
    }
    return rows;
}

} // namespace recomp
