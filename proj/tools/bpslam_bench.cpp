// Compares the serial reference kernels against the OpenMP variants and
// checks that both produce bitwise-identical results.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "bpslam/kernels.hpp"
#include "bpslam/models.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_of(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double>(Clock::now() - t0).count() /
           static_cast<double>(reps);
}

}  // namespace

int main() {
    constexpr std::size_t kN = 1u << 20;
    constexpr int kReps = 20;

    bpslam::Rng rng(7);
    std::uniform_real_distribution<double> u(-15.0, 15.0);
    std::vector<bpslam::Vec2> x(kN), a(kN);
    for (std::size_t i = 0; i < kN; ++i) {
        x[i] = {u(rng), u(rng)};
        a[i] = {u(rng), u(rng)};
    }
    std::vector<double> out_serial(kN), out_parallel(kN);
    std::vector<double> logw_serial(kN, 0.0), logw_parallel(kN, 0.0);

    const double z = 7.25, sigma = 0.15, scale = 28.5;
    const double t_det_s = time_of(
        [&] {
            bpslam::kernels::detection_factors_serial(kN, x.data(), a.data(), z, sigma,
                                                      scale, out_serial.data());
        },
        kReps);
    const double t_det_p = time_of(
        [&] {
            bpslam::kernels::detection_factors_parallel(kN, x.data(), a.data(), z, sigma,
                                                        scale, out_parallel.data());
        },
        kReps);
    const double t_log_s = time_of(
        [&] {
            bpslam::kernels::log_accumulate_serial(kN, logw_serial.data(),
                                                   out_serial.data());
        },
        kReps);
    const double t_log_p = time_of(
        [&] {
            bpslam::kernels::log_accumulate_parallel(kN, logw_parallel.data(),
                                                     out_parallel.data());
        },
        kReps);

    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < kN; ++i) {
        if (out_serial[i] != out_parallel[i]) ++mismatches;
    }

    std::printf("particles: %zu, reps: %d\n", kN, kReps);
    std::printf("detection_factors  serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n",
                1e3 * t_det_s, 1e3 * t_det_p, t_det_s / t_det_p);
    std::printf("log_accumulate     serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n",
                1e3 * t_log_s, 1e3 * t_log_p, t_log_s / t_log_p);
    std::printf("serial/parallel outputs identical: %s (%zu mismatches)\n",
                mismatches == 0 ? "yes" : "NO", mismatches);
    return mismatches == 0 ? 0 : 1;
}
