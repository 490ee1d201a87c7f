#include "recomp/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "recomp/errors.hpp"

namespace recomp {

void SvmParams::validate() const {
    if (!(c > 0)) throw Error(Errc::InsufficientSamples, "C must be > 0");
    if (!(gamma > 0)) throw Error(Errc::InsufficientSamples, "gamma must be > 0");
    if (!(tolerance > 0)) throw Error(Errc::InsufficientSamples, "tolerance must be > 0");
}

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
    if (x.size() != y.size())
        throw Error(Errc::LengthMismatch,
                    std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    double d2 = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

double BinarySvm::decision(std::span<const double> x, double gamma) const {
    double f = bias;
    for (size_t i = 0; i < support_vectors.size(); ++i)
        f += dual_coefs[i] * rbf_kernel(support_vectors[i], x, gamma);
    return f;
}

int BinarySvm::predict(std::span<const double> x, double gamma) const {
    const double f = decision(x, gamma);
    if (f > 0) return label_pos;
    if (f < 0) return label_neg;
    return std::min(label_pos, label_neg);
}

namespace {

constexpr double kAlphaClip = 1e-7; // alphas at or below this are not support vectors
constexpr double kQuadFloor = 1e-12;

// Dual solver: minimize 1/2 a^T Q a - e^T a with Q_ij = y_i y_j K_ij,
// 0 <= a <= C, y^T a = 0. First-order maximal-violating-pair selection,
// ties resolved toward the lowest index.
struct SmoSolver {
    std::span<const std::vector<double>> x;
    std::span<const int> y;
    const SvmParams& params;

    size_t n;
    std::vector<double> kernel; // n*n, K_ij
    std::vector<double> alpha;
    std::vector<double> grad; // (Q a)_t - 1
    bool converged = false;

    explicit SmoSolver(std::span<const std::vector<double>> x_, std::span<const int> y_,
                       const SvmParams& p)
        : x(x_), y(y_), params(p), n(x_.size()) {
        kernel.resize(n * n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j <= i; ++j)
                kernel[i * n + j] = kernel[j * n + i] = rbf_kernel(x[i], x[j], params.gamma);
        alpha.assign(n, 0.0);
        grad.assign(n, -1.0);
    }

    double k(size_t i, size_t j) const { return kernel[i * n + j]; }

    bool in_up(size_t t) const {
        return (y[t] > 0 && alpha[t] < params.c) || (y[t] < 0 && alpha[t] > 0);
    }
    bool in_low(size_t t) const {
        return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < params.c);
    }

    void solve() {
        const double C = params.c;
        for (long pass = 0; pass < params.max_passes; ++pass) {
            // maximal violating pair
            size_t i = n, j = n;
            double m = -std::numeric_limits<double>::infinity();
            double M = std::numeric_limits<double>::infinity();
            for (size_t t = 0; t < n; ++t) {
                const double v = -y[t] * grad[t];
                if (in_up(t) && v > m) { m = v; i = t; }
                if (in_low(t) && v < M) { M = v; j = t; }
            }
            if (i == n || j == n || m - M <= params.tolerance) {
                converged = (i != n && j != n) || n == 0;
                return;
            }

            // two-variable subproblem on (i, j)
            const int yi = y[i], yj = y[j];
            const double s = yi * yj;
            const double ai_old = alpha[i], aj_old = alpha[j];
            double L, H;
            if (s > 0) {
                L = std::max(0.0, ai_old + aj_old - C);
                H = std::min(C, ai_old + aj_old);
            } else {
                L = std::max(0.0, aj_old - ai_old);
                H = std::min(C, C + aj_old - ai_old);
            }
            double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
            if (quad <= kQuadFloor) quad = kQuadFloor;
            // errors without bias: e_t = y_t * grad_t
            const double ei = yi * grad[i], ej = yj * grad[j];
            // A clipped step lands alpha_j exactly on a bound, which moves
            // the pair out of I_up/I_low and changes the next selection, so
            // even infinitesimal steps make progress; selection guarantees
            // L < H strictly.
            double aj = aj_old + yj * (ei - ej) / quad;
            aj = std::clamp(aj, L, H);
            const double ai = ai_old + s * (aj_old - aj);
            alpha[i] = ai;
            alpha[j] = aj;
            const double di = (ai - ai_old) * yi, dj = (aj - aj_old) * yj;
            for (size_t t = 0; t < n; ++t)
                grad[t] += y[t] * (di * k(i, t) + dj * k(j, t));
        }
        converged = false; // max_passes exhausted
    }

    double compute_bias() const {
        // mean over free vectors; midpoint of the violating-pair bounds
        // when nothing is free
        double sum = 0.0;
        int free_count = 0;
        for (size_t t = 0; t < n; ++t) {
            if (alpha[t] > kAlphaClip && alpha[t] < params.c - kAlphaClip) {
                sum += -y[t] * grad[t];
                ++free_count;
            }
        }
        if (free_count > 0) return sum / free_count;
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        for (size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t)) m = std::max(m, v);
            if (in_low(t)) M = std::min(M, v);
        }
        if (!std::isfinite(m) || !std::isfinite(M)) return 0.0;
        return (m + M) / 2.0;
    }
};

} // namespace

BinarySvm train_binary_raw(std::span<const std::vector<double>> samples,
                           std::span<const int> labels, const SvmParams& params) {
    params.validate();
    if (samples.size() != labels.size())
        throw Error(Errc::LengthMismatch, "samples/labels size mismatch");
    if (samples.empty()) throw Error(Errc::SingleClassInput, "no samples");
    const size_t dim = samples.front().size();
    int pos = 0, neg = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].size() != dim)
            throw Error(Errc::DimensionMismatch, "sample " + std::to_string(i) + " has " +
                                                     std::to_string(samples[i].size()) +
                                                     " dims, expected " + std::to_string(dim));
        if (labels[i] == 1) ++pos;
        else if (labels[i] == -1) ++neg;
        else throw Error(Errc::SingleClassInput, "labels must be -1 or +1");
    }
    if (pos == 0 || neg == 0)
        throw Error(Errc::SingleClassInput, "need at least one sample of each label");

    SmoSolver solver(samples, labels, params);
    solver.solve();

    BinarySvm model;
    model.bias = solver.compute_bias();
    model.converged = solver.converged;
    for (size_t t = 0; t < samples.size(); ++t) {
        if (solver.alpha[t] > kAlphaClip) {
            model.support_vectors.push_back(samples[t]);
            model.dual_coefs.push_back(solver.alpha[t] * labels[t]);
        }
    }
    return model;
}

namespace {

std::vector<int> sorted_classes(std::span<const int> labels) {
    std::set<int> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

} // namespace

SvmModel train_binary(std::span<const std::vector<double>> samples, std::span<const int> labels,
                      const SvmParams& params) {
    auto classes = sorted_classes(labels);
    if (classes.size() != 2)
        throw Error(Errc::SingleClassInput,
                    "binary training needs exactly 2 classes, got " +
                        std::to_string(classes.size()));
    std::vector<int> pm(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) pm[i] = labels[i] == classes[0] ? 1 : -1;
    SvmModel model;
    model.params = params;
    model.classes = classes;
    BinarySvm b = train_binary_raw(samples, pm, params);
    b.label_pos = classes[0];
    b.label_neg = classes[1];
    model.sub_models.push_back(std::move(b));
    return model;
}

SvmModel train_multiclass(std::span<const std::vector<double>> samples,
                          std::span<const int> labels, const SvmParams& params) {
    auto classes = sorted_classes(labels);
    if (classes.size() < 2)
        throw Error(Errc::SingleClassInput, "need at least 2 classes");
    SvmModel model;
    model.params = params;
    model.classes = classes;
    for (size_t a = 0; a < classes.size(); ++a) {
        for (size_t b = a + 1; b < classes.size(); ++b) {
            std::vector<std::vector<double>> sub_x;
            std::vector<int> sub_y;
            for (size_t i = 0; i < samples.size(); ++i) {
                if (labels[i] == classes[a]) { sub_x.push_back(samples[i]); sub_y.push_back(1); }
                else if (labels[i] == classes[b]) { sub_x.push_back(samples[i]); sub_y.push_back(-1); }
            }
            BinarySvm bm = train_binary_raw(sub_x, sub_y, params);
            bm.label_pos = classes[a];
            bm.label_neg = classes[b];
            model.sub_models.push_back(std::move(bm));
        }
    }
    return model;
}

bool SvmModel::converged() const {
    for (const BinarySvm& m : sub_models)
        if (!m.converged) return false;
    return true;
}

double SvmModel::decision_value(std::span<const double> x) const {
    if (sub_models.size() != 1)
        throw Error(Errc::DimensionMismatch, "decision_value is for binary models");
    return sub_models.front().decision(x, params.gamma);
}

int SvmModel::predict(const FeatureVector& x) const {
    if (scaler.has_value() != x.scaled)
        throw Error(Errc::ScalingMismatch,
                    scaler ? "model trained on scaled features, input is unscaled"
                           : "model trained on unscaled features, input is scaled");
    if (!sub_models.empty() && !sub_models.front().support_vectors.empty() &&
        x.values.size() != sub_models.front().support_vectors.front().size())
        throw Error(Errc::DimensionMismatch,
                    std::to_string(x.values.size()) + "-dim input vs " +
                        std::to_string(sub_models.front().support_vectors.front().size()) +
                        "-dim model");

    std::map<int, int> votes;
    std::map<int, double> margin;
    for (int c : classes) { votes[c] = 0; margin[c] = 0.0; }
    for (const BinarySvm& m : sub_models) {
        const double f = m.decision(x.values, params.gamma);
        votes[m.predict(x.values, params.gamma)] += 1;
        margin[m.label_pos] += f;
        margin[m.label_neg] -= f;
    }
    int best = classes.front();
    for (int c : classes) {
        if (votes[c] > votes[best] ||
            (votes[c] == votes[best] &&
             (margin[c] > margin[best] || (margin[c] == margin[best] && c < best))))
            best = c;
    }
    return best;
}

std::vector<double> default_c_grid() {
    std::vector<double> g;
    for (int e = -5; e <= 15; e += 2) g.push_back(std::ldexp(1.0, e));
    return g;
}

std::vector<double> default_gamma_grid() {
    std::vector<double> g;
    for (int e = -15; e <= 3; e += 2) g.push_back(std::ldexp(1.0, e));
    return g;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, uint64_t seed) {
    std::vector<int> assignment(labels.size(), -1);
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::mt19937_64 rng(seed);
    for (auto& [cls, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (size_t k = 0; k < idx.size(); ++k)
            assignment[idx[k]] = static_cast<int>(k % folds);
    }
    return assignment;
}

GridSearchResult grid_search(std::span<const std::vector<double>> samples,
                             std::span<const int> labels, std::span<const double> c_grid,
                             std::span<const double> gamma_grid, int folds, uint64_t seed,
                             const SvmParams& base) {
    if (folds < 2) throw Error(Errc::InsufficientSamples, "folds must be >= 2");
    std::map<int, int> counts;
    for (int l : labels) counts[l] += 1;
    if (counts.size() < 2) throw Error(Errc::SingleClassInput, "need at least 2 classes");
    for (auto& [cls, cnt] : counts)
        if (cnt < folds)
            throw Error(Errc::InsufficientSamples,
                        "class " + std::to_string(cls) + " has " + std::to_string(cnt) +
                            " samples, fewer than " + std::to_string(folds) + " folds");

    const std::vector<int> fold_of = stratified_folds(labels, folds, seed);

    GridSearchResult result;
    result.seed = seed;
    double best_score = -1.0;
    for (double c : c_grid) {
        for (double gamma : gamma_grid) {
            SvmParams p = base;
            p.c = c;
            p.gamma = gamma;
            std::vector<double> scores(folds, 0.0);
            for (int f = 0; f < folds; ++f) {
                std::vector<std::vector<double>> train_x;
                std::vector<int> train_y;
                std::vector<size_t> test_idx;
                for (size_t i = 0; i < samples.size(); ++i) {
                    if (fold_of[i] == f) test_idx.push_back(i);
                    else { train_x.push_back(samples[i]); train_y.push_back(labels[i]); }
                }
                SvmModel model = train_multiclass(train_x, train_y, p);
                if (!model.converged()) result.any_nonconverged = true;
                int correct = 0;
                for (size_t i : test_idx) {
                    FeatureVector fv;
                    fv.values = samples[i];
                    if (model.predict(fv) == labels[i]) ++correct;
                }
                scores[f] = test_idx.empty() ? 0.0
                                             : static_cast<double>(correct) /
                                                   static_cast<double>(test_idx.size());
            }
            double mean = 0.0;
            for (double s : scores) mean += s;
            mean /= folds;
            result.search_log.emplace_back(c, gamma, mean);
            // strict > keeps the first (smallest C, then gamma) among ties
            if (mean > best_score) {
                best_score = mean;
                result.best_params = p;
                result.fold_scores = scores;
            }
        }
    }
    result.cv_accuracy = best_score;
    return result;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

std::string g17(double v) {
    char buf[40];
    snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view s, long line_no) {
    try {
        size_t used = 0;
        double v = std::stod(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error(Errc::Grammar, line_no, "bad number '" + std::string(s) + "'");
    }
}

} // namespace

std::string model_to_string(const SvmModel& model) {
    std::ostringstream out;
    out << "recomp-svm-model v1\n";
    out << "kernel rbf\n";
    out << "c " << g17(model.params.c) << "\n";
    out << "gamma " << g17(model.params.gamma) << "\n";
    out << "tolerance " << g17(model.params.tolerance) << "\n";
    out << "classes";
    for (int c : model.classes) out << ' ' << c;
    out << "\n";
    if (model.scaler) {
        out << "scaler " << model.scaler->method << ' ' << model.scaler->dims() << "\n";
        out << "location";
        for (double v : model.scaler->location) out << ' ' << g17(v);
        out << "\nspread";
        for (double v : model.scaler->spread) out << ' ' << g17(v);
        out << "\n";
    } else {
        out << "scaler none\n";
    }
    out << "submodels " << model.sub_models.size() << "\n";
    for (const BinarySvm& m : model.sub_models) {
        out << "submodel " << m.label_pos << ' ' << m.label_neg << ' '
            << (m.converged ? 1 : 0) << "\n";
        out << "bias " << g17(m.bias) << "\n";
        out << "nsv " << m.support_vectors.size() << "\n";
        for (size_t i = 0; i < m.support_vectors.size(); ++i) {
            out << g17(m.dual_coefs[i]);
            for (double v : m.support_vectors[i]) out << ' ' << g17(v);
            out << "\n";
        }
    }
    out << "end\n";
    return std::move(out).str();
}

namespace {

struct LineReader {
    std::string_view text;
    size_t pos = 0;
    long line_no = 0;

    std::optional<std::string_view> next() {
        if (pos >= text.size()) return std::nullopt;
        size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    }
    std::string_view require(std::string_view what) {
        auto l = next();
        if (!l) throw Error(Errc::Grammar, line_no, "unexpected end of model, wanted " +
                                                        std::string(what));
        return *l;
    }
};

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        size_t start = i;
        while (i < s.size() && s[i] != ' ') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

} // namespace

SvmModel model_from_string(std::string_view text) {
    LineReader r{text};
    if (r.require("magic") != "recomp-svm-model v1")
        throw Error(Errc::Grammar, r.line_no, "not a recomp model file");
    if (r.require("kernel") != "kernel rbf")
        throw Error(Errc::Grammar, r.line_no, "unsupported kernel");

    SvmModel model;
    auto expect_kv = [&](std::string_view key) {
        auto fields = split_ws(r.require(key));
        if (fields.size() != 2 || fields[0] != key)
            throw Error(Errc::Grammar, r.line_no, "expected '" + std::string(key) + " <value>'");
        return fields[1];
    };
    model.params.c = parse_double(expect_kv("c"), r.line_no);
    model.params.gamma = parse_double(expect_kv("gamma"), r.line_no);
    model.params.tolerance = parse_double(expect_kv("tolerance"), r.line_no);

    auto class_fields = split_ws(r.require("classes"));
    if (class_fields.size() < 3 || class_fields[0] != "classes")
        throw Error(Errc::Grammar, r.line_no, "expected 'classes <a> <b> [...]'");
    for (size_t i = 1; i < class_fields.size(); ++i)
        model.classes.push_back(static_cast<int>(parse_double(class_fields[i], r.line_no)));

    auto scaler_fields = split_ws(r.require("scaler"));
    if (scaler_fields.size() >= 2 && scaler_fields[0] == "scaler" && scaler_fields[1] != "none") {
        if (scaler_fields.size() != 3)
            throw Error(Errc::Grammar, r.line_no, "expected 'scaler <method> <dims>'");
        FeatureScaler s;
        s.method = std::string(scaler_fields[1]);
        const int dims = static_cast<int>(parse_double(scaler_fields[2], r.line_no));
        auto loc = split_ws(r.require("location"));
        auto spr = split_ws(r.require("spread"));
        if (loc.size() != static_cast<size_t>(dims) + 1 || loc[0] != "location" ||
            spr.size() != static_cast<size_t>(dims) + 1 || spr[0] != "spread")
            throw Error(Errc::Grammar, r.line_no, "bad scaler statistics");
        for (int d = 0; d < dims; ++d) {
            s.location.push_back(parse_double(loc[d + 1], r.line_no));
            s.spread.push_back(parse_double(spr[d + 1], r.line_no));
        }
        model.scaler = std::move(s);
    } else if (scaler_fields.size() != 2 || scaler_fields[0] != "scaler") {
        throw Error(Errc::Grammar, r.line_no, "bad scaler line");
    }

    auto sub_fields = split_ws(r.require("submodels"));
    if (sub_fields.size() != 2 || sub_fields[0] != "submodels")
        throw Error(Errc::Grammar, r.line_no, "expected 'submodels <count>'");
    const long n_sub = static_cast<long>(parse_double(sub_fields[1], r.line_no));
    for (long s = 0; s < n_sub; ++s) {
        auto head = split_ws(r.require("submodel"));
        if (head.size() != 4 || head[0] != "submodel")
            throw Error(Errc::Grammar, r.line_no, "expected 'submodel <pos> <neg> <converged>'");
        BinarySvm m;
        m.label_pos = static_cast<int>(parse_double(head[1], r.line_no));
        m.label_neg = static_cast<int>(parse_double(head[2], r.line_no));
        m.converged = parse_double(head[3], r.line_no) != 0;
        m.bias = parse_double(expect_kv("bias"), r.line_no);
        const long nsv = static_cast<long>(parse_double(expect_kv("nsv"), r.line_no));
        for (long i = 0; i < nsv; ++i) {
            auto fields = split_ws(r.require("support vector"));
            if (fields.size() < 2)
                throw Error(Errc::Grammar, r.line_no, "bad support vector line");
            m.dual_coefs.push_back(parse_double(fields[0], r.line_no));
            std::vector<double> sv;
            for (size_t f = 1; f < fields.size(); ++f)
                sv.push_back(parse_double(fields[f], r.line_no));
            m.support_vectors.push_back(std::move(sv));
        }
        model.sub_models.push_back(std::move(m));
    }
    if (r.require("end") != "end")
        throw Error(Errc::Grammar, r.line_no, "missing end marker");
    return model;
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << model_to_string(model);
    if (!out) throw Error(Errc::Io, "short write to " + path.string());
}

SvmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::FileNotFound, "cannot read model " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_string(std::move(ss).str());
}

} // namespace recomp
