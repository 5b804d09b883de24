// Rough throughput check for the convolution kernels at the face-network
// geometry. Not part of the test suite.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "fer/kernels.hpp"
#include "fer/rng.hpp"
#include "fer/tensor.hpp"

using Clock = std::chrono::steady_clock;

static double secs(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : 1;
    fer::set_compute_threads(threads);
    fer::Rng rng(7);

    // conv2 of the face nets: 32 -> 64 channels at 100x100, k=5.
    const int C = 32, F = 64, H = 100, W = 100, k = 5;
    std::vector<double> x(C * H * W), w(F * C * k * k), b(F, 0.1), y(F * H * W);
    std::vector<double> gy(F * H * W), gx(C * H * W, 0.0), gw(w.size(), 0.0), gb(F, 0.0);
    for (auto& v : x) v = rng.uniform();
    for (auto& v : w) v = rng.uniform(-0.1, 0.1);
    for (auto& v : gy) v = rng.uniform(-1, 1);

    const double macs = static_cast<double>(F) * C * k * k * H * W;
    const int reps = 10;

    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r)
        fer::kernels::conv2d_forward(x.data(), C, H, W, w.data(), F, k, b.data(), y.data());
    auto t1 = Clock::now();
    std::printf("forward:          %7.1f ms/iter  %6.2f GFLOP/s\n", 1e3 * secs(t0, t1) / reps,
                2e-9 * macs * reps / secs(t0, t1));

    t0 = Clock::now();
    for (int r = 0; r < reps; ++r)
        fer::kernels::conv2d_backward_input(gy.data(), F, H, W, w.data(), C, k, gx.data());
    t1 = Clock::now();
    std::printf("backward_input:   %7.1f ms/iter  %6.2f GFLOP/s\n", 1e3 * secs(t0, t1) / reps,
                2e-9 * macs * reps / secs(t0, t1));

    t0 = Clock::now();
    for (int r = 0; r < reps; ++r)
        fer::kernels::conv2d_backward_params(gy.data(), F, H, W, x.data(), C, k, gw.data(), gb.data());
    t1 = Clock::now();
    std::printf("backward_params:  %7.1f ms/iter  %6.2f GFLOP/s\n", 1e3 * secs(t0, t1) / reps,
                2e-9 * macs * reps / secs(t0, t1));
    return 0;
}
