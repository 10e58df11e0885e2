#pragma once

#include <cstddef>
#include <vector>

#include "bpslam/geometry.hpp"

namespace bpslam {

struct OspaParams {
    double cutoff = 5.0;  // m
    double order = 1.0;
};

/// Min-cost one-to-one assignment of min(n, m) pairs on a rectangular
/// nonnegative cost matrix (row-major, n rows, m cols). Returns, per row,
/// the assigned column or -1.
std::vector<int> optimal_assignment(const std::vector<double>& cost,
                                    std::size_t n_rows, std::size_t n_cols);

double assignment_cost(const std::vector<double>& cost, std::size_t n_rows,
                       std::size_t n_cols, const std::vector<int>& assignment);

/// OSPA distance between two point sets. Empty vs empty is 0.
double ospa(const std::vector<Vec2>& truth, const std::vector<Vec2>& estimate,
            const OspaParams& params);

/// Per-time-step RMSE of estimated positions over runs.
/// estimates_per_run[r][n] aligns with truth[n].
std::vector<double> rmse(const std::vector<Vec2>& truth,
                         const std::vector<std::vector<Vec2>>& estimates_per_run);

}  // namespace bpslam
