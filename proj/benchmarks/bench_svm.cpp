#include <benchmark/benchmark.h>

#include <random>

#include "recomp/svm.hpp"

using namespace recomp;

namespace {

struct Problem {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};

Problem two_clusters(int n, uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.2);
    Problem p;
    for (int i = 0; i < n; ++i) {
        const int cls = i % 2;
        p.x.push_back({cls * 3.0 + noise(rng), noise(rng)});
        p.y.push_back(cls ? 1 : -1);
    }
    return p;
}

void BM_rbf_kernel(benchmark::State& state) {
    std::vector<double> a{14.2, 8.8, 6.1}, b{9.7, 7.2, 5.9};
    for (auto _ : state) benchmark::DoNotOptimize(rbf_kernel(a, b, 0.125));
}
BENCHMARK(BM_rbf_kernel);

void BM_smo_train_200(benchmark::State& state) {
    Problem p = two_clusters(200, 7);
    SvmParams params;
    params.c = 4.0;
    params.gamma = 0.5;
    for (auto _ : state) benchmark::DoNotOptimize(train_binary_raw(p.x, p.y, params));
}
BENCHMARK(BM_smo_train_200);

void BM_predict(benchmark::State& state) {
    Problem p = two_clusters(200, 8);
    SvmParams params;
    params.c = 4.0;
    params.gamma = 0.5;
    BinarySvm m = train_binary_raw(p.x, p.y, params);
    std::vector<double> probe{1.4, -0.3};
    for (auto _ : state) benchmark::DoNotOptimize(m.decision(probe, params.gamma));
}
BENCHMARK(BM_predict);

void BM_grid_search_small(benchmark::State& state) {
    Problem p = two_clusters(40, 9);
    std::vector<int> labels(p.y.size());
    for (size_t i = 0; i < p.y.size(); ++i) labels[i] = p.y[i] > 0 ? 1 : 0;
    const std::vector<double> cs{0.5, 2.0, 8.0};
    const std::vector<double> gs{0.125, 0.5, 2.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(grid_search(p.x, labels, cs, gs, 3, 1));
}
BENCHMARK(BM_grid_search_small);

} // namespace
