#include "bpslam/bp_da.hpp"

#include <cmath>
#include <limits>

namespace bpslam {

namespace {

constexpr double kHuge = 1e300;

void check_inputs(const DaInputs& in) {
    const std::size_t K = in.num_features();
    const std::size_t M = in.num_measurements();
    if (K > 0 && in.beta.cols != M + 1)
        throw DegenerateDaError("beta must be K x (M+1)");
    if (M > 0 && in.xi.cols != K + 1)
        throw DegenerateDaError("xi must be M x (K+1)");
    for (std::size_t k = 0; k < K; ++k) {
        double s = 0.0;
        for (std::size_t c = 0; c <= M; ++c) {
            if (in.beta(k, c) < 0.0) throw DegenerateDaError("negative beta entry");
            s += in.beta(k, c);
        }
        if (s <= 0.0) throw DegenerateDaError("all-zero beta row");
    }
    for (std::size_t m = 0; m < M; ++m) {
        double s = 0.0;
        for (std::size_t b = 0; b <= K; ++b) {
            if (in.xi(m, b) < 0.0) throw DegenerateDaError("negative xi entry");
            s += in.xi(m, b);
        }
        if (s <= 0.0) throw DegenerateDaError("all-zero xi row");
    }
}

DaMatrix normalized_rows(const DaMatrix& a) {
    DaMatrix out = a;
    for (std::size_t r = 0; r < a.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols; ++c) s += out(r, c);
        for (std::size_t c = 0; c < a.cols; ++c) out(r, c) /= s;
    }
    return out;
}

double safe_ratio(double num, double den) {
    if (den > 0.0) return std::min(num / den, kHuge);
    return num > 0.0 ? kHuge : 0.0;
}

DaOutputs trivial_outputs(std::size_t K, std::size_t M) {
    DaOutputs out;
    out.eta = DaMatrix(K, M + 1);
    out.sigma_out = DaMatrix(M, K + 1);
    for (std::size_t k = 0; k < K; ++k) out.eta(k, 0) = 1.0;
    for (std::size_t m = 0; m < M; ++m) out.sigma_out(m, 0) = 1.0;
    out.converged = true;
    return out;
}

}  // namespace

DaOutputs da_iterate(const DaInputs& inputs, double eps, std::size_t p_max) {
    check_inputs(inputs);
    const std::size_t K = inputs.num_features();
    const std::size_t M = inputs.num_measurements();
    if (K == 0 || M == 0) return trivial_outputs(K, M);

    const DaMatrix beta = normalized_rows(inputs.beta);
    const DaMatrix xi = normalized_rows(inputs.xi);

    // Ratio messages: u(m,k) = nu_{m->k}(c=m) / nu_{m->k}(c!=m),
    //                 v(k,m) = zeta_{k->m}(b=k) / zeta_{k->m}(b!=k).
    DaMatrix v(K, M), u(M, K), u_prev(M, K);
    for (std::size_t k = 0; k < K; ++k) {
        double row = 0.0;
        for (std::size_t c = 0; c <= M; ++c) row += beta(k, c);
        for (std::size_t m = 0; m < M; ++m)
            v(k, m) = safe_ratio(beta(k, m + 1), row - beta(k, m + 1));
    }
    for (auto& x : u_prev.data) x = std::numeric_limits<double>::quiet_NaN();

    DaOutputs out;
    for (out.iterations = 1; out.iterations <= p_max; ++out.iterations) {
        for (std::size_t m = 0; m < M; ++m) {
            double acc = xi(m, 0);
            for (std::size_t k = 0; k < K; ++k) acc += xi(m, k + 1) * v(k, m);
            for (std::size_t k = 0; k < K; ++k) {
                const double den = acc - xi(m, k + 1) * v(k, m);
                u(m, k) = safe_ratio(xi(m, k + 1), den);
            }
        }
        for (std::size_t k = 0; k < K; ++k) {
            double acc = beta(k, 0);
            for (std::size_t m = 0; m < M; ++m) acc += beta(k, m + 1) * u(m, k);
            for (std::size_t m = 0; m < M; ++m) {
                const double den = acc - beta(k, m + 1) * u(m, k);
                v(k, m) = safe_ratio(beta(k, m + 1), den);
            }
        }
        // Change of the normalized per-pair nu messages: each nu_{m->k} has
        // one entry proportional to u and M entries proportional to 1.
        double sq = 0.0;
        bool have_prev = !std::isnan(u_prev(0, 0));
        if (have_prev) {
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t k = 0; k < K; ++k) {
                    const double a = u(m, k) / (u(m, k) + double(M));
                    const double b = u_prev(m, k) / (u_prev(m, k) + double(M));
                    const double d_same = a - b;
                    const double d_other =
                        1.0 / (u(m, k) + double(M)) - 1.0 / (u_prev(m, k) + double(M));
                    sq += d_same * d_same + double(M) * d_other * d_other;
                }
            if (std::sqrt(sq) < eps) {
                out.converged = true;
                break;
            }
        }
        u_prev = u;
    }
    if (out.iterations > p_max) out.iterations = p_max;

    out.eta = DaMatrix(K, M + 1);
    out.sigma_out = DaMatrix(M, K + 1);
    for (std::size_t k = 0; k < K; ++k) {
        double s = 1.0;
        out.eta(k, 0) = 1.0;
        for (std::size_t m = 0; m < M; ++m) {
            out.eta(k, m + 1) = u(m, k);
            s += u(m, k);
        }
        for (std::size_t c = 0; c <= M; ++c) out.eta(k, c) /= s;
    }
    for (std::size_t m = 0; m < M; ++m) {
        double s = 1.0;
        out.sigma_out(m, 0) = 1.0;
        for (std::size_t k = 0; k < K; ++k) {
            out.sigma_out(m, k + 1) = v(k, m);
            s += v(k, m);
        }
        for (std::size_t b = 0; b <= K; ++b) out.sigma_out(m, b) /= s;
    }
    return out;
}

DaOutputs da_iterate_direct(const DaInputs& inputs, double eps, std::size_t p_max) {
    check_inputs(inputs);
    const std::size_t K = inputs.num_features();
    const std::size_t M = inputs.num_measurements();
    if (K == 0 || M == 0) return trivial_outputs(K, M);

    const DaMatrix beta = normalized_rows(inputs.beta);
    const DaMatrix xi = normalized_rows(inputs.xi);

    // nu[m][k] is a vector over c in {0..M}; zeta[k][m] over b in {0..K}.
    auto idx3 = [](std::size_t a, std::size_t b, std::size_t stride) {
        return a * stride + b;
    };
    std::vector<std::vector<double>> nu(M * K, std::vector<double>(M + 1, 0.0));
    std::vector<std::vector<double>> nu_prev(M * K,
                                             std::vector<double>(M + 1, 0.0));
    std::vector<std::vector<double>> zeta(K * M, std::vector<double>(K + 1, 0.0));

    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t m = 0; m < M; ++m) {
            auto& z = zeta[idx3(k, m, M)];
            double s = 0.0;
            for (std::size_t b = 0; b <= K; ++b) {
                double acc = 0.0;
                for (std::size_t c = 0; c <= M; ++c)
                    acc += beta(k, c) *
                           exclusion_psi((int)c, (int)b, (int)k + 1, (int)m + 1);
                z[b] = acc;
                s += acc;
            }
            for (double& x : z) x /= s;
        }

    DaOutputs out;
    for (out.iterations = 1; out.iterations <= p_max; ++out.iterations) {
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = 0; k < K; ++k) {
                auto& n = nu[idx3(m, k, K)];
                double s = 0.0;
                for (std::size_t c = 0; c <= M; ++c) {
                    double acc = 0.0;
                    for (std::size_t b = 0; b <= K; ++b) {
                        double prod = xi(m, b) * exclusion_psi((int)c, (int)b,
                                                               (int)k + 1, (int)m + 1);
                        for (std::size_t k2 = 0; k2 < K; ++k2)
                            if (k2 != k) prod *= zeta[idx3(k2, m, M)][b];
                        acc += prod;
                    }
                    n[c] = acc;
                    s += acc;
                }
                for (double& x : n) x /= s;
            }
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t m = 0; m < M; ++m) {
                auto& z = zeta[idx3(k, m, M)];
                double s = 0.0;
                for (std::size_t b = 0; b <= K; ++b) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c <= M; ++c) {
                        double prod = beta(k, c) * exclusion_psi((int)c, (int)b,
                                                                 (int)k + 1, (int)m + 1);
                        for (std::size_t m2 = 0; m2 < M; ++m2)
                            if (m2 != m) prod *= nu[idx3(m2, k, K)][c];
                        acc += prod;
                    }
                    z[b] = acc;
                    s += acc;
                }
                for (double& x : z) x /= s;
            }
        double sq = 0.0;
        for (std::size_t i = 0; i < M * K; ++i)
            for (std::size_t c = 0; c <= M; ++c) {
                const double d = nu[i][c] - nu_prev[i][c];
                sq += d * d;
            }
        nu_prev = nu;
        if (out.iterations > 1 && std::sqrt(sq) < eps) {
            out.converged = true;
            break;
        }
    }
    if (out.iterations > p_max) out.iterations = p_max;

    out.eta = DaMatrix(K, M + 1);
    out.sigma_out = DaMatrix(M, K + 1);
    for (std::size_t k = 0; k < K; ++k) {
        double s = 0.0;
        for (std::size_t c = 0; c <= M; ++c) {
            double prod = 1.0;
            for (std::size_t m = 0; m < M; ++m) prod *= nu[idx3(m, k, K)][c];
            out.eta(k, c) = prod;
            s += prod;
        }
        for (std::size_t c = 0; c <= M; ++c) out.eta(k, c) /= s;
    }
    for (std::size_t m = 0; m < M; ++m) {
        double s = 0.0;
        for (std::size_t b = 0; b <= K; ++b) {
            double prod = 1.0;
            for (std::size_t k = 0; k < K; ++k) prod *= zeta[idx3(k, m, M)][b];
            out.sigma_out(m, b) = prod;
            s += prod;
        }
        for (std::size_t b = 0; b <= K; ++b) out.sigma_out(m, b) /= s;
    }
    return out;
}

DaOutputs exact_da_marginals(const DaInputs& inputs) {
    check_inputs(inputs);
    const std::size_t K = inputs.num_features();
    const std::size_t M = inputs.num_measurements();
    if (K > 8 || M > 8)
        throw DegenerateDaError("enumeration oracle limited to K, M <= 8");
    if (K == 0 || M == 0) return trivial_outputs(K, M);

    const DaMatrix beta = normalized_rows(inputs.beta);
    const DaMatrix xi = normalized_rows(inputs.xi);

    DaOutputs out;
    out.eta = DaMatrix(K, M + 1);
    out.sigma_out = DaMatrix(M, K + 1);
    out.converged = true;

    std::vector<std::size_t> c(K, 0);
    // Depth-first over feature-oriented association vectors; a bitmask
    // rules out reusing a measurement.
    auto visit = [&](auto&& self, std::size_t k, unsigned used, double w) -> void {
        if (w == 0.0) return;
        if (k == K) {
            // b is determined by c; unassociated measurements take b = 0.
            double joint = w;
            for (std::size_t m = 0; m < M; ++m) {
                std::size_t b = 0;
                for (std::size_t k2 = 0; k2 < K; ++k2)
                    if (c[k2] == m + 1) b = k2 + 1;
                joint *= xi(m, b);
            }
            if (joint == 0.0) return;
            for (std::size_t k2 = 0; k2 < K; ++k2) out.eta(k2, c[k2]) += joint;
            for (std::size_t m = 0; m < M; ++m) {
                std::size_t b = 0;
                for (std::size_t k2 = 0; k2 < K; ++k2)
                    if (c[k2] == m + 1) b = k2 + 1;
                out.sigma_out(m, b) += joint;
            }
            return;
        }
        for (std::size_t cv = 0; cv <= M; ++cv) {
            if (cv > 0 && (used & (1u << (cv - 1)))) continue;
            c[k] = cv;
            self(self, k + 1, cv > 0 ? used | (1u << (cv - 1)) : used,
                 w * beta(k, cv));
        }
    };
    visit(visit, 0, 0u, 1.0);

    for (std::size_t k = 0; k < K; ++k) {
        double s = 0.0;
        for (std::size_t cv = 0; cv <= M; ++cv) s += out.eta(k, cv);
        if (s <= 0.0) throw DegenerateDaError("no feasible association");
        for (std::size_t cv = 0; cv <= M; ++cv) out.eta(k, cv) /= s;
    }
    for (std::size_t m = 0; m < M; ++m) {
        double s = 0.0;
        for (std::size_t b = 0; b <= K; ++b) s += out.sigma_out(m, b);
        for (std::size_t b = 0; b <= K; ++b) out.sigma_out(m, b) /= s;
    }
    return out;
}

DaMatrix da_posterior_c(const DaInputs& inputs, const DaOutputs& messages) {
    DaMatrix out = messages.eta;
    for (std::size_t k = 0; k < out.rows; ++k) {
        double s = 0.0;
        for (std::size_t c = 0; c < out.cols; ++c) {
            out(k, c) *= inputs.beta(k, c);
            s += out(k, c);
        }
        for (std::size_t c = 0; c < out.cols; ++c) out(k, c) /= s;
    }
    return out;
}

DaMatrix da_posterior_b(const DaInputs& inputs, const DaOutputs& messages) {
    DaMatrix out = messages.sigma_out;
    for (std::size_t m = 0; m < out.rows; ++m) {
        double s = 0.0;
        for (std::size_t b = 0; b < out.cols; ++b) {
            out(m, b) *= inputs.xi(m, b);
            s += out(m, b);
        }
        for (std::size_t b = 0; b < out.cols; ++b) out(m, b) /= s;
    }
    return out;
}

}  // namespace bpslam
