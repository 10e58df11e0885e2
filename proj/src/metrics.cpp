#include "bpslam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bpslam {

namespace {

// O(n^3) Hungarian algorithm with potentials, on an n x m matrix with
// n <= m (rows are assigned left to right).
std::vector<int> hungarian(const std::vector<double>& a, std::size_t n,
                           std::size_t m) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, false);
        do {
            used[j0] = true;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = (int)j - 1;
    return row_to_col;
}

}  // namespace

std::vector<int> optimal_assignment(const std::vector<double>& cost,
                                    std::size_t n_rows, std::size_t n_cols) {
    if (cost.size() != n_rows * n_cols)
        throw std::invalid_argument("cost matrix size mismatch");
    if (n_rows == 0 || n_cols == 0) return std::vector<int>(n_rows, -1);
    if (n_rows <= n_cols) return hungarian(cost, n_rows, n_cols);
    // Transpose, solve, invert the mapping.
    std::vector<double> t(n_cols * n_rows);
    for (std::size_t i = 0; i < n_rows; ++i)
        for (std::size_t j = 0; j < n_cols; ++j)
            t[j * n_rows + i] = cost[i * n_cols + j];
    const std::vector<int> col_to_row = hungarian(t, n_cols, n_rows);
    std::vector<int> row_to_col(n_rows, -1);
    for (std::size_t j = 0; j < n_cols; ++j)
        if (col_to_row[j] >= 0) row_to_col[(std::size_t)col_to_row[j]] = (int)j;
    return row_to_col;
}

double assignment_cost(const std::vector<double>& cost, std::size_t n_rows,
                       std::size_t n_cols, const std::vector<int>& assignment) {
    double total = 0.0;
    for (std::size_t i = 0; i < n_rows; ++i)
        if (assignment[i] >= 0) total += cost[i * n_cols + (std::size_t)assignment[i]];
    return total;
}

double ospa(const std::vector<Vec2>& truth, const std::vector<Vec2>& estimate,
            const OspaParams& params) {
    if (params.cutoff <= 0.0) throw std::invalid_argument("cutoff must be > 0");
    const std::size_t n = truth.size(), m = estimate.size();
    if (n == 0 && m == 0) return 0.0;
    if (n == 0 || m == 0) return params.cutoff;

    std::vector<double> cost(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            cost[i * m + j] =
                std::pow(std::min(params.cutoff, distance(truth[i], estimate[j])),
                         params.order);
    const std::vector<int> assign = optimal_assignment(cost, n, m);
    const double matched = assignment_cost(cost, n, m, assign);
    const double big = (double)std::max(n, m);
    const double card = std::pow(params.cutoff, params.order) *
                        (big - (double)std::min(n, m));
    return std::pow((matched + card) / big, 1.0 / params.order);
}

std::vector<double> rmse(const std::vector<Vec2>& truth,
                         const std::vector<std::vector<Vec2>>& estimates_per_run) {
    for (const auto& run : estimates_per_run)
        if (run.size() != truth.size())
            throw std::invalid_argument("estimate length mismatch");
    std::vector<double> out(truth.size(), 0.0);
    if (estimates_per_run.empty()) return out;
    for (std::size_t n = 0; n < truth.size(); ++n) {
        double s = 0.0;
        for (const auto& run : estimates_per_run) {
            const double d = distance(run[n], truth[n]);
            s += d * d;
        }
        out[n] = std::sqrt(s / (double)estimates_per_run.size());
    }
    return out;
}

}  // namespace bpslam
