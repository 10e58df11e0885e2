#include <doctest.h>

#include <cmath>
#include <random>

#include "bpslam/bp_da.hpp"

using namespace bpslam;

namespace {

DaInputs make_inputs(std::size_t k, std::size_t m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 3.0);
    DaInputs in;
    in.beta = DaMatrix(k, m + 1);
    in.xi = DaMatrix(m, k + 1);
    for (double& v : in.beta.data) v = u(rng);
    for (double& v : in.xi.data) v = u(rng);
    return in;
}

// Association problem of the kind the range filter produces: K feature
// ranges separated by at least 1 m, M measurements drawn from the features
// (sigma = 0.15) or clutter, beta rows of likelihood-vs-clutter ratios and a
// flat birth row in xi. On resolvable instances like these, loopy BP tracks
// the exact marginals closely; when two features fall inside the same
// measurement ring the association itself is ambiguous and no bound holds.
DaInputs likelihood_inputs(std::size_t k_count, std::size_t m_count,
                           std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(0.0, 15.0);
    std::normal_distribution<double> noise(0.0, 0.15);
    std::vector<double> d(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        bool ok = false;
        while (!ok) {
            d[k] = pos(rng);
            ok = true;
            for (std::size_t j = 0; j < k; ++j)
                if (std::abs(d[k] - d[j]) < 1.0) ok = false;
        }
    }
    std::vector<double> z(m_count);
    std::uniform_int_distribution<std::size_t> origin(0, k_count);
    for (double& v : z) {
        const std::size_t s = origin(rng);
        v = s < k_count ? d[s] + noise(rng) : pos(rng) * 2.0;
    }
    const double p_d = 0.95, clutter = 1.0 / 30.0;
    DaInputs in;
    in.beta = DaMatrix(k_count, m_count + 1);
    in.xi = DaMatrix(m_count, k_count + 1);
    for (std::size_t k = 0; k < k_count; ++k) {
        in.beta(k, 0) = 1.0 - p_d;
        for (std::size_t m = 0; m < m_count; ++m) {
            const double diff = z[m] - d[k];
            in.beta(k, m + 1) = p_d *
                                std::exp(-0.5 * diff * diff / (0.15 * 0.15)) /
                                (0.15 * std::sqrt(2.0 * std::acos(-1.0))) / clutter;
        }
    }
    for (std::size_t m = 0; m < m_count; ++m) {
        in.xi(m, 0) = 1.2;
        for (std::size_t k = 0; k < k_count; ++k) in.xi(m, k + 1) = 1.0;
    }
    return in;
}

double max_rel_err(const DaMatrix& a, const DaMatrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double denom = std::max(std::abs(b.data[i]), 1e-12);
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]) / denom);
    }
    return worst;
}

}  // namespace

TEST_SUITE_BEGIN("bp_da");

TEST_CASE("exclusion constraint indicator") {
    CHECK(exclusion_psi(2, 1, 1, 2) == 1);  // c = m and b = k
    CHECK(exclusion_psi(2, 0, 1, 2) == 0);  // c = m but b != k
    CHECK(exclusion_psi(0, 1, 1, 2) == 0);  // b = k but c != m
    CHECK(exclusion_psi(0, 0, 1, 2) == 1);
    CHECK(exclusion_psi(3, 5, 1, 2) == 1);  // neither side claims the pair
}

TEST_CASE("empty problems are trivially converged") {
    DaInputs none;
    const DaOutputs out = da_iterate(none);
    CHECK(out.converged);
    CHECK(out.iterations == 0);
    CHECK(out.eta.rows == 0);
    CHECK(out.sigma_out.rows == 0);
}

TEST_CASE("single feature, single measurement matches hand enumeration") {
    // beta = (1, 2), xi = (1, 3). Feasible joints: (c=0, b=0) weight 1*1
    // and (c=1, b=1) weight 2*3, so p(c=1) = 6/7.
    DaInputs in;
    in.beta = DaMatrix(1, 2);
    in.beta(0, 0) = 1.0;
    in.beta(0, 1) = 2.0;
    in.xi = DaMatrix(1, 2);
    in.xi(0, 0) = 1.0;
    in.xi(0, 1) = 3.0;

    const DaOutputs out = da_iterate(in);
    CHECK(out.converged);
    const DaMatrix post = da_posterior_c(in, out);
    CHECK(post(0, 1) == doctest::Approx(6.0 / 7.0).epsilon(1e-9));
    CHECK(post(0, 0) == doctest::Approx(1.0 / 7.0).epsilon(1e-9));

    // The enumeration oracle returns posteriors directly in eta.
    const DaOutputs exact = exact_da_marginals(in);
    CHECK(max_rel_err(post, exact.eta) < 1e-9);
}

TEST_CASE("tree instances are exact") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int t = 0; t < 1000; ++t) {
        std::size_t k = 1, m = 1;
        if (t % 2 == 0)
            m = (std::size_t)dim(rng);  // K = 1, any M
        else
            k = (std::size_t)dim(rng);  // M = 1, any K
        const DaInputs in = make_inputs(k, m, rng);
        const DaOutputs bp = da_iterate(in);
        const DaOutputs exact = exact_da_marginals(in);
        CHECK(bp.converged);
        CHECK(max_rel_err(da_posterior_c(in, bp), exact.eta) < 1e-9);
        CHECK(max_rel_err(da_posterior_b(in, bp), exact.sigma_out) < 1e-9);
    }
}

TEST_CASE("loopy instances stay within 10 percent of enumeration") {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> dim(2, 4);
    for (int t = 0; t < 1000; ++t) {
        const DaInputs in =
            likelihood_inputs((std::size_t)dim(rng), (std::size_t)dim(rng), rng);
        const DaOutputs bp = da_iterate(in);
        const DaOutputs exact = exact_da_marginals(in);
        CHECK(bp.converged);
        // Relative error on all marginals carrying at least 1% mass.
        const DaMatrix post = da_posterior_c(in, bp);
        for (std::size_t i = 0; i < post.data.size(); ++i) {
            if (exact.eta.data[i] >= 0.01) {
                CHECK(std::abs(post.data[i] - exact.eta.data[i]) /
                          exact.eta.data[i] <
                      0.10);
            }
        }
    }
}

TEST_CASE("row scaling leaves normalized posteriors unchanged") {
    std::mt19937_64 rng(44);
    for (int t = 0; t < 100; ++t) {
        const DaInputs in = make_inputs(3, 3, rng);
        DaInputs scaled = in;
        std::uniform_real_distribution<double> s(0.1, 50.0);
        for (std::size_t k = 0; k < 3; ++k) {
            const double f = s(rng);
            for (std::size_t c = 0; c < 4; ++c) scaled.beta(k, c) *= f;
        }
        const DaMatrix a = da_posterior_c(in, da_iterate(in));
        const DaMatrix b = da_posterior_c(scaled, da_iterate(scaled));
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            CHECK(std::abs(a.data[i] - b.data[i]) < 1e-12);
        }
    }
}

TEST_CASE("convergence within the iteration cap on random instances") {
    std::mt19937_64 rng(45);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int t = 0; t < 1000; ++t) {
        const DaInputs in = make_inputs((std::size_t)dim(rng), (std::size_t)dim(rng), rng);
        const DaOutputs out = da_iterate(in);
        CHECK(out.converged);
        CHECK(out.iterations < 1000);
        for (double v : out.eta.data) CHECK(v >= 0.0);
        for (double v : out.sigma_out.data) CHECK(v >= 0.0);
    }
}

TEST_CASE("ratio form agrees with the direct message recursion") {
    std::mt19937_64 rng(46);
    std::uniform_int_distribution<int> dim(1, 5);
    for (int t = 0; t < 200; ++t) {
        const DaInputs in = make_inputs((std::size_t)dim(rng), (std::size_t)dim(rng), rng);
        const DaMatrix fast = da_posterior_c(in, da_iterate(in));
        const DaMatrix slow = da_posterior_c(in, da_iterate_direct(in));
        CHECK(max_rel_err(fast, slow) < 1e-6);
    }
}

TEST_CASE("degenerate rows raise") {
    DaInputs in;
    in.beta = DaMatrix(1, 2);  // all-zero row
    in.xi = DaMatrix(1, 2);
    in.xi(0, 0) = 1.0;
    in.xi(0, 1) = 1.0;
    CHECK_THROWS_AS(da_iterate(in), DegenerateDaError);
}

TEST_CASE("oracle marginals normalize and respect symmetry") {
    DaInputs in;
    in.beta = DaMatrix(2, 3);
    in.xi = DaMatrix(2, 3);
    for (double& v : in.beta.data) v = 1.0;
    for (double& v : in.xi.data) v = 1.0;
    const DaOutputs exact = exact_da_marginals(in);
    const DaMatrix& post = exact.eta;
    for (std::size_t k = 0; k < 2; ++k) {
        double row = 0.0;
        for (std::size_t c = 0; c < 3; ++c) row += post(k, c);
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
        // Symmetric weights: both measurements equally likely for a feature.
        CHECK(post(k, 1) == doctest::Approx(post(k, 2)).epsilon(1e-12));
    }
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(exact_da_marginals(make_inputs(9, 9, rng)), DegenerateDaError);
}

TEST_SUITE_END();
