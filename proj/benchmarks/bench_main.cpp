#include <benchmark/benchmark.h>

#include <random>

#include "mdfcn/fcn.hpp"
#include "mdfcn/gradcam.hpp"
#include "mdfcn/mdf.hpp"

namespace {

mdfcn::TimeSeries random_series(std::size_t T, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    mdfcn::TimeSeries x;
    for (std::size_t t = 0; t < T; ++t) x.values.push_back(dist(rng));
    x.label = 1;
    return x;
}

void BM_Encode(benchmark::State& state) {
    const auto x = random_series(static_cast<std::size_t>(state.range(0)), 42);
    const std::size_t n = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mdfcn::encode(x, n));
    }
}
BENCHMARK(BM_Encode)->Args({64, 2})->Args({64, 3})->Args({256, 3})->Args({512, 3});

void BM_ForwardBatch(benchmark::State& state) {
    std::vector<mdfcn::MdfImage> batch;
    for (unsigned i = 0; i < 16; ++i) {
        batch.push_back(mdfcn::encode(random_series(64, i + 1), 3));
    }
    mdfcn::FcnModel model = mdfcn::make_model(
        2, 4, {16, 32, 16},
        {static_cast<std::size_t>(state.range(0)),
         static_cast<std::size_t>(state.range(1)),
         static_cast<std::size_t>(state.range(2))},
        7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mdfcn::forward(model, batch));
    }
}
BENCHMARK(BM_ForwardBatch)->Args({8, 5, 3})->Args({2, 2, 2});

void BM_GradCam(benchmark::State& state) {
    const mdfcn::MdfImage img = mdfcn::encode(random_series(64, 5), 3);
    mdfcn::FcnModel model = mdfcn::make_model(2, 4, {16, 32, 16}, {2, 2, 2}, 7);
    for (auto _ : state) {
        const mdfcn::Grid coarse = mdfcn::grad_cam(model, img, 1);
        benchmark::DoNotOptimize(
            mdfcn::symmetrize(mdfcn::upsample_bilinear(coarse, img.d_max(), img.width())));
    }
}
BENCHMARK(BM_GradCam);

}  // namespace

BENCHMARK_MAIN();
