#pragma once

#include <cstddef>
#include <vector>

#include "bpslam/geometry.hpp"

namespace bpslam::kernels {

// out[i] = scale * N(z; ||x_i - a_i||, sigma). The parallel variants produce
// bitwise-identical results to the serial references (pure per-index maps).
void detection_factors_serial(std::size_t n, const Vec2* x, const Vec2* a, double z,
                              double sigma, double scale, double* out);
void detection_factors_parallel(std::size_t n, const Vec2* x, const Vec2* a, double z,
                                double sigma, double scale, double* out);
void detection_factors(std::size_t n, const Vec2* x, const Vec2* a, double z,
                       double sigma, double scale, double* out, bool parallel);

// logw[i] += log(g[i]) with g[i] clamped away from zero.
void log_accumulate_serial(std::size_t n, double* logw, const double* g);
void log_accumulate_parallel(std::size_t n, double* logw, const double* g);
void log_accumulate(std::size_t n, double* logw, const double* g, bool parallel);

// Serial reductions: kept sequential so results are thread-count independent.
double sum(std::size_t n, const double* v);
double weighted_sum(std::size_t n, const double* w, const double* v);

}  // namespace bpslam::kernels
