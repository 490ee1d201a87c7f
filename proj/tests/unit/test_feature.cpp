#include <doctest.h>

#include <random>
#include <sstream>

#include "recomp/errors.hpp"
#include "recomp/feature.hpp"

#include "grid_gen.hpp"

using namespace recomp;

namespace {

MacroblockMode mode(MbKind kind, MbPartition part = MbPartition::Whole16x16,
                    std::vector<MotionVector> mvs = {}) {
    MacroblockMode m;
    m.mb_type.kind = kind;
    m.mb_type.partition = part;
    m.mvs = std::move(mvs);
    return m;
}

MotionVector mv(int dx, int dy) {
    MotionVector v;
    v.dx = dx;
    v.dy = dy;
    v.block_w = 16;
    v.block_h = 16;
    return v;
}

// Brute-force recount of Eq-style instability, re-deriving MBM equality
// field by field; kept independent of mbm_equal / compute_vi on purpose.
double oracle_vi(const std::vector<FrameGrid>& a, const std::vector<FrameGrid>& b) {
    auto types_equal = [](const MacroblockType& x, const MacroblockType& y) {
        if (x.kind != y.kind) return false;
        if (x.partition != y.partition) return false;
        if (x.kind == MbKind::Other && x.raw != y.raw) return false;
        return true;
    };
    auto vectors_equal = [](const std::vector<MotionVector>& x,
                            const std::vector<MotionVector>& y) {
        if (x.size() != y.size()) return false;
        for (size_t i = 0; i < x.size(); ++i) {
            if (x[i].dx != y[i].dx || x[i].dy != y[i].dy) return false;
            if (x[i].direction != y[i].direction) return false;
            if (x[i].block_x != y[i].block_x || x[i].block_y != y[i].block_y) return false;
            if (x[i].block_w != y[i].block_w || x[i].block_h != y[i].block_h) return false;
        }
        return true;
    };
    long n_p = 0;
    long long unstable = 0;
    for (size_t k = 0; k < a.size(); ++k) {
        if (a[k].frame_type != FrameType::P) continue;
        ++n_p;
        for (size_t i = 0; i < a[k].cells.size(); ++i) {
            const MacroblockMode& ma = a[k].cells[i];
            const MacroblockMode& mb = b[k].cells[i];
            bool same = types_equal(ma.mb_type, mb.mb_type);
            if (same) {
                const bool no_vectors_needed = ma.mb_type.kind == MbKind::Skip ||
                                               ma.mb_type.kind == MbKind::Intra4x4 ||
                                               ma.mb_type.kind == MbKind::Intra16x16;
                if (!no_vectors_needed) same = vectors_equal(ma.mvs, mb.mvs);
            }
            if (!same) ++unstable;
        }
    }
    return static_cast<double>(unstable) / static_cast<double>(n_p);
}

} // namespace

TEST_CASE("mbm_equal: the paper's equality rules") {
    SUBCASE("reflexivity") {
        auto m = mode(MbKind::ForwardPred, MbPartition::Four8x8, {mv(1, 2)});
        CHECK(mbm_equal(m, m));
    }
    SUBCASE("skip cells ignore stale vector lists") {
        auto a = mode(MbKind::Skip, MbPartition::Whole16x16, {mv(1, 0)});
        auto b = mode(MbKind::Skip, MbPartition::Whole16x16, {mv(5, -3), mv(0, 0)});
        CHECK(mbm_equal(a, b));
    }
    SUBCASE("intra cells ignore vectors too") {
        auto a = mode(MbKind::Intra16x16, MbPartition::Whole16x16, {mv(9, 9)});
        auto b = mode(MbKind::Intra16x16);
        CHECK(mbm_equal(a, b));
    }
    SUBCASE("vector inequality breaks equality for predicted cells") {
        auto a = mode(MbKind::ForwardPred, MbPartition::Whole16x16, {mv(1, 0)});
        auto b = mode(MbKind::ForwardPred, MbPartition::Whole16x16, {mv(0, 0)});
        CHECK(!mbm_equal(a, b));
    }
    SUBCASE("partition is part of the type") {
        auto a = mode(MbKind::ForwardPred, MbPartition::Two16x8);
        auto b = mode(MbKind::ForwardPred, MbPartition::Two8x16);
        CHECK(!mbm_equal(a, b));
    }
    SUBCASE("type mismatch") {
        CHECK(!mbm_equal(mode(MbKind::Intra16x16), mode(MbKind::Intra4x4)));
    }
}

TEST_CASE("indicator is 1 - [mbm_equal]") {
    auto a = mode(MbKind::ForwardPred, MbPartition::Whole16x16, {mv(1, 0)});
    auto b = mode(MbKind::ForwardPred, MbPartition::Whole16x16, {mv(0, 0)});
    CHECK(indicator(a, a) == 0);
    CHECK(indicator(a, b) == 1);
    CHECK(indicator(mode(MbKind::Intra16x16), mode(MbKind::Intra4x4)) == 1);
}

TEST_CASE("indicator properties on random mode pairs") {
    std::mt19937 rng(42);
    for (int i = 0; i < 10000; ++i) {
        auto a = testgen::random_mode(rng);
        auto b = testgen::random_mode(rng);
        CHECK(indicator(a, a) == 0);
        CHECK(indicator(a, b) == indicator(b, a));
        if (!(a.mb_type == b.mb_type)) CHECK(indicator(a, b) == 1);
    }
}

TEST_CASE("compute_vi: hand-built synthetic pair") {
    // 2 P-frames of 2x2 cells, 3 cells differing in total -> 3/2 = 1.5
    std::vector<FrameGrid> a, b;
    for (int k = 0; k < 2; ++k) {
        FrameGrid g;
        g.frame_index = k;
        g.frame_type = FrameType::P;
        g.rows = g.cols = 2;
        g.cells.assign(4, mode(MbKind::ForwardPred, MbPartition::Whole16x16, {mv(0, 0)}));
        a.push_back(g);
        b.push_back(g);
    }
    b[0].cells[0] = mode(MbKind::Skip);
    b[0].cells[3] = mode(MbKind::ForwardPred, MbPartition::Whole16x16, {mv(1, 0)});
    b[1].cells[2] = mode(MbKind::Intra4x4);
    CHECK(compute_vi(a, b) == 1.5); // exact: integer count over N=2
    CHECK(compute_vi(a, a) == 0.0);
    // symmetry when P-frame sets agree
    CHECK(compute_vi(a, b) == compute_vi(b, a));
}

TEST_CASE("compute_vi: only P-frames of gen_a count") {
    std::mt19937 rng(3);
    auto a = testgen::random_generation(rng, 4, 2, 2);
    a[0].frame_type = FrameType::I;
    a[1].frame_type = FrameType::P;
    a[2].frame_type = FrameType::B;
    a[3].frame_type = FrameType::P;
    auto b = a;
    // churn the I and B frames: must not affect v
    b[0].cells[0] = testgen::random_mode(rng);
    b[2].cells[3] = testgen::random_mode(rng);
    CHECK(compute_vi(a, b) == 0.0);
    // a type flip in gen_b on a gen_a P-frame counts through the indicator
    b[3].frame_type = FrameType::I;
    CHECK(compute_vi(a, b) == 0.0); // cells unchanged, frame type itself is not a cell
}

TEST_CASE("compute_vi errors") {
    std::mt19937 rng(4);
    auto a = testgen::random_generation(rng, 3, 2, 2);
    SUBCASE("frame count") {
        auto b = a;
        b.pop_back();
        try {
            compute_vi(a, b);
            FAIL("expected FrameCountMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::FrameCountMismatch);
        }
    }
    SUBCASE("dimensions") {
        auto b = a;
        b[1] = testgen::random_grid(rng, 1, FrameType::P, 3, 2);
        try {
            compute_vi(a, b);
            FAIL("expected DimensionMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::DimensionMismatch);
        }
    }
    SUBCASE("no P-frames is an error, not 0/0") {
        auto a2 = a;
        for (auto& g : a2) g.frame_type = FrameType::B;
        try {
            compute_vi(a2, a2);
            FAIL("expected NoPFrames");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::NoPFrames);
        }
    }
}

TEST_CASE("compute_vi equals the brute-force oracle on random small grids") {
    std::mt19937 rng(1234);
    for (int iter = 0; iter < 500; ++iter) {
        const int frames = 1 + rng() % 5, rows = 1 + rng() % 4, cols = 1 + rng() % 4;
        auto a = testgen::random_generation(rng, frames, rows, cols);
        auto b = testgen::perturb_generation(rng, a, 300);
        CHECK(compute_vi(a, b) == oracle_vi(a, b)); // exact, no tolerance
    }
}

TEST_CASE("compute_feature_vector walks consecutive generation pairs") {
    std::mt19937 rng(5);
    std::vector<std::vector<FrameGrid>> gens;
    gens.push_back(testgen::random_generation(rng, 3, 2, 2));
    for (int i = 0; i < 3; ++i) gens.push_back(testgen::perturb_generation(rng, gens.back(), 200));

    auto v = compute_feature_vector(gens, 3);
    REQUIRE(v.values.size() == 3);
    for (int i = 0; i < 3; ++i)
        CHECK(v.values[i] == compute_vi(gens[i], gens[i + 1]));
    CHECK(!v.scaled);

    auto v2 = compute_feature_vector(gens, 2);
    CHECK(v2.values.size() == 2);

    // identical dummy generations -> all-zero vector
    std::vector<std::vector<FrameGrid>> same{gens[0], gens[0], gens[0]};
    auto z = compute_feature_vector(same, 2);
    CHECK(z.values == std::vector<double>{0.0, 0.0});

    CHECK_THROWS_AS(compute_feature_vector(gens, 4), Error);
}

TEST_CASE("feature vector bounds: 0 <= v_i <= rows*cols") {
    std::mt19937 rng(6);
    for (int iter = 0; iter < 100; ++iter) {
        const int rows = 1 + rng() % 4, cols = 1 + rng() % 4;
        auto a = testgen::random_generation(rng, 3, rows, cols);
        auto b = testgen::random_generation(rng, 3, rows, cols);
        for (size_t k = 0; k < b.size(); ++k) b[k].frame_type = a[k].frame_type;
        const double v = compute_vi(a, b);
        CHECK(v >= 0.0);
        CHECK(v <= rows * cols);
    }
}

TEST_CASE("scaler: standardization with unit-spread fallback") {
    std::vector<FeatureVector> train(3);
    train[0].values = {1.0, 5.0};
    train[1].values = {2.0, 5.0};
    train[2].values = {3.0, 5.0};
    FeatureScaler s = fit_scaler(train);
    CHECK(s.location[0] == doctest::Approx(2.0));
    CHECK(s.spread[1] == 1.0); // constant dimension

    // the training mean maps to 0 per dimension
    FeatureVector mean;
    mean.values = {2.0, 5.0};
    auto scaled = s.apply(mean);
    CHECK(scaled.scaled);
    CHECK(scaled.values[0] == doctest::Approx(0.0));
    CHECK(scaled.values[1] == doctest::Approx(0.0));

    // apply then invert recovers inputs
    FeatureVector x;
    x.values = {2.7, 9.1};
    auto back = s.invert(s.apply(x));
    CHECK(back.values[0] == doctest::Approx(2.7));
    CHECK(back.values[1] == doctest::Approx(9.1));
    CHECK(!back.scaled);
}

TEST_CASE("scaling preserves dimension-wise rank order") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> dist(0.0, 50.0);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<FeatureVector> train(8);
        for (auto& v : train) v.values = {dist(rng), dist(rng)};
        FeatureScaler s = fit_scaler(train);
        for (size_t d = 0; d < 2; ++d) {
            for (size_t i = 0; i < train.size(); ++i) {
                for (size_t j = 0; j < train.size(); ++j) {
                    const bool before = train[i].values[d] < train[j].values[d];
                    const bool after = s.apply(train[i]).values[d] < s.apply(train[j]).values[d];
                    CHECK(before == after);
                }
            }
        }
    }
}

TEST_CASE("scaler errors") {
    CHECK_THROWS_AS(fit_scaler(std::vector<FeatureVector>{}), Error);
    std::vector<FeatureVector> mixed(2);
    mixed[0].values = {1.0};
    mixed[1].values = {1.0, 2.0};
    try {
        fit_scaler(mixed);
        FAIL("expected LengthMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::LengthMismatch);
    }
    FeatureScaler s;
    s.location = {0.0};
    s.spread = {1.0};
    FeatureVector v;
    v.values = {1.0, 2.0};
    CHECK_THROWS_AS(s.apply(v), Error);
}

TEST_CASE("feature CSV round trip with 6-digit formatting") {
    std::vector<FeatureVector> rows(2);
    rows[0].values = {34.4, 29.583333};
    rows[0].label = 0;
    rows[1].values = {12.25, 8.0};
    rows[1].label = 1;
    std::ostringstream out;
    write_feature_csv(out, rows);
    CHECK(out.str() == "label,v0,v1\n0,34.400000,29.583333\n1,12.250000,8.000000\n");

    std::istringstream in(out.str());
    auto back = read_feature_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].label == 0);
    CHECK(back[1].values[0] == doctest::Approx(12.25));

    // unlabeled rows keep an empty label field
    FeatureVector anon;
    anon.values = {1.0, 2.0};
    CHECK(feature_csv_row(anon) == ",1.000000,2.000000");
    std::istringstream in2("label,v0,v1\n,1.000000,2.000000\n");
    auto anon_back = read_feature_csv(in2);
    REQUIRE(anon_back.size() == 1);
    CHECK(!anon_back[0].label.has_value());
}
