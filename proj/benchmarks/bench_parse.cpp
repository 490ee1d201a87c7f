#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "recomp/grid_io.hpp"
#include "recomp/mb_parse.hpp"

using namespace recomp;

namespace {

// 480p-sized debug text: 60 frames of 30x45 cells
std::string make_debug_text(int frames, int rows, int cols) {
    std::mt19937 rng(42);
    const char types[] = {'i', 'I', 'S', '>', '<', 'X', 'd'};
    const char parts[] = {' ', '-', '|', '+'};
    std::string text;
    for (int f = 0; f < frames; ++f) {
        text += "New frame, type: ";
        text += f % 12 == 0 ? 'I' : (f % 3 ? 'P' : 'B');
        text += '\n';
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                text += types[rng() % 7];
                text += parts[rng() % 4];
                text += ' ';
            }
            text += '\n';
        }
    }
    return text;
}

std::string make_mv_text(int frames, int per_frame) {
    std::mt19937 rng(43);
    std::string text =
        "framenum,source,blockw,blockh,srcx,srcy,dstx,dsty,flags,motion_x,motion_y,motion_scale\n";
    char buf[128];
    for (int f = 1; f < frames; ++f) {
        for (int i = 0; i < per_frame; ++i) {
            const int bx = static_cast<int>(rng() % 45) * 16 + 8;
            const int by = static_cast<int>(rng() % 30) * 16 + 8;
            snprintf(buf, sizeof buf, "%d,-1,16,16,%d,%d,%d,%d,0,%d,%d,4\n", f, bx, by, bx, by,
                     static_cast<int>(rng() % 33) - 16, static_cast<int>(rng() % 33) - 16);
            text += buf;
        }
    }
    return text;
}

void BM_parse_debug_stream(benchmark::State& state) {
    const std::string text = make_debug_text(60, 30, 45);
    for (auto _ : state) benchmark::DoNotOptimize(parse_debug_stream(text));
    state.SetBytesProcessed(state.iterations() * text.size());
}
BENCHMARK(BM_parse_debug_stream);

void BM_parse_mv_dump(benchmark::State& state) {
    const std::string text = make_mv_text(60, 600);
    for (auto _ : state) benchmark::DoNotOptimize(parse_mv_dump(text));
    state.SetBytesProcessed(state.iterations() * text.size());
}
BENCHMARK(BM_parse_mv_dump);

void BM_merge_and_serialize(benchmark::State& state) {
    auto matrices = parse_debug_stream(make_debug_text(60, 30, 45));
    auto mv_map = parse_mv_dump(make_mv_text(60, 600));
    for (auto _ : state) {
        auto grids = merge_mb_and_mv(matrices, mv_map, 720, 480);
        benchmark::DoNotOptimize(serialize_grids(grids));
    }
}
BENCHMARK(BM_merge_and_serialize);

} // namespace
