#include "bpslam/kernels.hpp"

#include <cmath>

#include "bpslam/models.hpp"

namespace bpslam::kernels {

namespace {
constexpr double kLogFloor = 1e-300;
}

void detection_factors_serial(std::size_t n, const Vec2* x, const Vec2* a, double z,
                              double sigma, double scale, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = scale * gaussian_pdf(z, distance(x[i], a[i]), sigma);
    }
}

void detection_factors_parallel(std::size_t n, const Vec2* x, const Vec2* a, double z,
                                double sigma, double scale, double* out) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        out[i] = scale * gaussian_pdf(z, distance(x[i], a[i]), sigma);
    }
}

void detection_factors(std::size_t n, const Vec2* x, const Vec2* a, double z,
                       double sigma, double scale, double* out, bool parallel) {
    if (parallel) {
        detection_factors_parallel(n, x, a, z, sigma, scale, out);
    } else {
        detection_factors_serial(n, x, a, z, sigma, scale, out);
    }
}

void log_accumulate_serial(std::size_t n, double* logw, const double* g) {
    for (std::size_t i = 0; i < n; ++i) {
        logw[i] += std::log(g[i] > kLogFloor ? g[i] : kLogFloor);
    }
}

void log_accumulate_parallel(std::size_t n, double* logw, const double* g) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        logw[i] += std::log(g[i] > kLogFloor ? g[i] : kLogFloor);
    }
}

void log_accumulate(std::size_t n, double* logw, const double* g, bool parallel) {
    if (parallel) {
        log_accumulate_parallel(n, logw, g);
    } else {
        log_accumulate_serial(n, logw, g);
    }
}

double sum(std::size_t n, const double* v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += v[i];
    return acc;
}

double weighted_sum(std::size_t n, const double* w, const double* v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * v[i];
    return acc;
}

}  // namespace bpslam::kernels
