#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bpslam {

/// Row-major matrix of nonnegative message values.
struct DaMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DaMatrix() = default;
    DaMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Inputs of one association problem: beta is K x (M+1) over c in {0..M},
/// xi is M x (K+1) over b in {0..K}.
struct DaInputs {
    DaMatrix beta;
    DaMatrix xi;

    std::size_t num_features() const { return beta.rows; }
    std::size_t num_measurements() const { return xi.rows; }
};

struct DaOutputs {
    DaMatrix eta;        // K x (M+1), normalized per feature
    DaMatrix sigma_out;  // M x (K+1), normalized per measurement
    std::size_t iterations = 0;
    bool converged = false;
};

struct DegenerateDaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pairwise exclusion-constraint indicator: 0 iff exactly one of
/// (c == m) and (b == k) holds.
inline int exclusion_psi(int c, int b, int k, int m) {
    return ((c == m) != (b == k)) ? 0 : 1;
}

/// Loopy BP with messages reduced to one scalar ratio per (feature,
/// measurement) pair. Stops when the root-sum-square change of the
/// normalized per-pair messages drops below eps, or after p_max sweeps.
DaOutputs da_iterate(const DaInputs& inputs, double eps = 1e-7,
                     std::size_t p_max = 1000);

/// Direct evaluation of the same recursion with full message tables; slow,
/// kept as a cross-check for the ratio reformulation.
DaOutputs da_iterate_direct(const DaInputs& inputs, double eps = 1e-7,
                            std::size_t p_max = 1000);

/// Exact marginals by enumerating all feasible associations (b determined
/// by c). Guarded to K <= 8, M <= 8.
DaOutputs exact_da_marginals(const DaInputs& inputs);

/// Normalized per-variable beliefs: beta .* eta rows (and xi .* sigma rows),
/// the quantities the exact marginals correspond to.
DaMatrix da_posterior_c(const DaInputs& inputs, const DaOutputs& messages);
DaMatrix da_posterior_b(const DaInputs& inputs, const DaOutputs& messages);

}  // namespace bpslam
