#include <benchmark/benchmark.h>

#include <random>

#include "recomp/feature.hpp"

using namespace recomp;

namespace {

MacroblockMode make_mode(std::mt19937& rng) {
    MacroblockMode m;
    const MbKind kinds[] = {MbKind::Skip, MbKind::ForwardPred, MbKind::Intra4x4,
                            MbKind::Bidirectional};
    m.mb_type.kind = kinds[rng() % 4];
    m.mb_type.partition = static_cast<MbPartition>(rng() % 4);
    if (m.mb_type.kind == MbKind::ForwardPred || m.mb_type.kind == MbKind::Bidirectional) {
        MotionVector mv;
        mv.dx = static_cast<int>(rng() % 33) - 16;
        mv.dy = static_cast<int>(rng() % 33) - 16;
        mv.block_w = mv.block_h = 16;
        m.mvs.push_back(mv);
    }
    return m;
}

std::vector<FrameGrid> make_generation(uint32_t seed, int frames, int rows, int cols) {
    std::mt19937 rng(seed);
    std::vector<FrameGrid> gen;
    for (int k = 0; k < frames; ++k) {
        FrameGrid g;
        g.frame_index = k;
        g.frame_type = k % 12 == 0 ? FrameType::I : (k % 3 == 0 ? FrameType::B : FrameType::P);
        g.rows = rows;
        g.cols = cols;
        g.cells.reserve(static_cast<size_t>(rows) * cols);
        for (int i = 0; i < rows * cols; ++i) g.cells.push_back(make_mode(rng));
        gen.push_back(std::move(g));
    }
    return gen;
}

// 1080p-sized grids, 25 frames per generation
void BM_compute_vi_1080p(benchmark::State& state) {
    auto a = make_generation(1, 25, 68, 120);
    auto b = make_generation(2, 25, 68, 120);
    for (auto _ : state) benchmark::DoNotOptimize(compute_vi(a, b));
    state.SetItemsProcessed(state.iterations() * 25 * 68 * 120);
}
BENCHMARK(BM_compute_vi_1080p);

void BM_mbm_equal(benchmark::State& state) {
    std::mt19937 rng(3);
    std::vector<MacroblockMode> modes;
    for (int i = 0; i < 1024; ++i) modes.push_back(make_mode(rng));
    size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mbm_equal(modes[i & 1023], modes[(i + 1) & 1023]));
        ++i;
    }
}
BENCHMARK(BM_mbm_equal);

void BM_fit_scaler(benchmark::State& state) {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> dist(0.0, 40.0);
    std::vector<FeatureVector> train(200);
    for (auto& v : train) v.values = {dist(rng), dist(rng), dist(rng)};
    for (auto _ : state) benchmark::DoNotOptimize(fit_scaler(train));
}
BENCHMARK(BM_fit_scaler);

} // namespace
