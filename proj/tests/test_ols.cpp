#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "adact/network.hpp"
#include "adact/ols.hpp"
#include "adact/trainers.hpp"
#include "oracles.hpp"

using namespace adact;

namespace {

// Gram matrix of the transformed basis: (A R A^T) restricted to accepted rows.
double max_orthonormality_defect(const OrthoFactorization& f, const Matrix& r) {
    const std::size_t nu = r.rows();
    double worst = 0.0;
    for (std::size_t m = 0; m < nu; ++m) {
        if (!f.accepted[m]) continue;
        for (std::size_t l = 0; l < nu; ++l) {
            if (!f.accepted[l]) continue;
            double acc = 0.0;
            for (std::size_t k = 0; k <= m; ++k)
                for (std::size_t q = 0; q <= l; ++q) acc += f.A(m, k) * r(k, q) * f.A(l, q);
            worst = std::max(worst, std::abs(acc - (m == l ? 1.0 : 0.0)));
        }
    }
    return worst;
}

Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

}  // namespace

TEST_CASE("orthonormalize leaves an identity system alone", "[ols]") {
    const Matrix r = identity(4);
    const OrthoFactorization f = orthonormalize(r);
    REQUIRE(f.valid_count() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            REQUIRE(f.A(i, j) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-14));
}

TEST_CASE("orthonormalize scales a diagonal system by inverse norms", "[ols]") {
    Matrix r(2, 2);
    r(0, 0) = 4.0;
    r(1, 1) = 9.0;
    const OrthoFactorization f = orthonormalize(r);
    REQUIRE(f.A(0, 0) == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(f.A(1, 1) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    REQUIRE(f.A(1, 0) == 0.0);
    REQUIRE(f.valid_count() == 2);
}

TEST_CASE("a duplicated basis column is flagged dependent", "[ols]") {
    // R from data whose second column duplicates the first
    std::mt19937 rng(7);
    Matrix x(20, 3);
    for (std::size_t p = 0; p < 20; ++p) {
        std::normal_distribution<double> g(0.0, 1.0);
        x(p, 0) = g(rng);
        x(p, 1) = x(p, 0);
        x(p, 2) = g(rng);
    }
    Matrix r(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < 20; ++p) acc += x(p, i) * x(p, j);
            r(i, j) = acc / 20.0;
        }
    const OrthoFactorization f = orthonormalize(r);
    REQUIRE(f.accepted[0] == 1);
    REQUIRE(f.accepted[1] == 0);
    REQUIRE(f.accepted[2] == 1);
    REQUIRE(f.valid_count() == 2);
}

TEST_CASE("a degenerate first basis throws unless the solver skips it", "[ols]") {
    Matrix r(2, 2);
    r(1, 1) = 1.0;
    REQUIRE_THROWS_AS(orthonormalize(r), FirstBasisDegenerateError);

    Matrix c(2, 1);
    c(1, 0) = 2.0;
    const Matrix w = solve_via_ols(r, c);
    REQUIRE(w.all_finite());
    REQUIRE(w(0, 0) == 0.0);
    REQUIRE(w(0, 1) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("transformed Gram matrix is the identity on accepted rows", "[ols]") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t nu = 2 + trial;
        const Matrix r = oracles::random_spd(nu, rng, 0.5, 5.0);
        const OrthoFactorization f = orthonormalize(r);
        REQUIRE(f.valid_count() == nu);
        REQUIRE(max_orthonormality_defect(f, r) <= 1e-8);
    }
}

TEST_CASE("solve_via_ols matches an independent dense solver", "[ols]") {
    std::mt19937 rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t nu = 2 + rng() % 19;
        const std::size_t m = 1 + rng() % 4;
        const Matrix r = oracles::random_spd(nu, rng, 1.0, 4.0);
        const Matrix c = oracles::random_matrix(nu, m, rng);
        const Matrix mine = solve_via_ols(r, c);
        const Matrix ref = oracles::dense_solve_oracle(r, c);
        for (std::size_t i = 0; i < mine.values().size(); ++i) {
            const double a = mine.values()[i], b = ref.values()[i];
            REQUIRE(std::abs(a - b) <= 1e-8 * std::max({1.0, std::abs(a), std::abs(b)}));
        }
    }
}

TEST_CASE("identity R returns C transposed", "[ols]") {
    std::mt19937 rng(3);
    const Matrix c = oracles::random_matrix(5, 2, rng);
    const Matrix w = solve_via_ols(identity(5), c);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 5; ++k)
            REQUIRE(w(i, k) == Catch::Approx(c(k, i)).margin(1e-12));
}

TEST_CASE("rank-deficient systems reproduce the pseudo-inverse fit", "[ols]") {
    std::mt19937 rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t nu = 4 + trial % 4;
        const std::size_t nv = 6 * nu;
        Matrix x = oracles::random_matrix(nv, nu, rng);
        for (std::size_t p = 0; p < nv; ++p) x(p, 1) = x(p, 0);  // exact dependence
        const Matrix t = oracles::random_matrix(nv, 2, rng);
        Matrix r(nu, nu), c(nu, 2);
        for (std::size_t i = 0; i < nu; ++i) {
            for (std::size_t j = 0; j < nu; ++j) {
                double acc = 0.0;
                for (std::size_t p = 0; p < nv; ++p) acc += x(p, i) * x(p, j);
                r(i, j) = acc / static_cast<double>(nv);
            }
            for (std::size_t k = 0; k < 2; ++k) {
                double acc = 0.0;
                for (std::size_t p = 0; p < nv; ++p) acc += x(p, i) * t(p, k);
                c(i, k) = acc / static_cast<double>(nv);
            }
        }
        const Matrix mine = solve_via_ols(r, c);
        REQUIRE(mine.all_finite());
        const Matrix ref = oracles::pinv_solve_oracle(r, c);
        // the minimum-residual fit R w^T is unique even though w is not
        auto fit = [&r, nu](const Matrix& w, std::size_t i, std::size_t q) {
            double acc = 0.0;
            for (std::size_t k = 0; k < nu; ++k) acc += r(q, k) * w(i, k);
            return acc;
        };
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t q = 0; q < nu; ++q)
                REQUIRE(fit(mine, i, q) == Catch::Approx(fit(ref, i, q)).margin(1e-6));
    }
}

TEST_CASE("orthonormal error matches a full forward pass", "[ols]") {
    std::mt19937 rng(67);
    MlpNetwork net = init_network(3, 2, 2, 19, 0.8);
    const Matrix x = oracles::random_matrix(30, 3, rng);
    const Matrix t = oracles::random_matrix(30, 2, rng);
    TrainConfig cfg;
    cfg.hidden_units = 2;
    cfg.hinges = 7;
    prime_network(net, x, cfg);
    const ForwardCache cache = forward(net, x);
    const CorrelationSystem sys = build_correlations(cache, t);
    const OrthoFactorization f = orthonormalize(sys.R);
    const Matrix wp = orthonormal_weights(f, sys.C);

    double target_energy = 0.0;
    for (double v : t.values()) target_energy += v * v;
    target_energy /= static_cast<double>(t.rows());

    owo_step(net, cache, t);
    const double direct = mse(outputs_from_cache(net, cache), t);
    REQUIRE(orthonormal_error(wp, target_energy) == Catch::Approx(direct).margin(1e-8));
}

TEST_CASE("orthonormal error edge cases", "[ols]") {
    Matrix wp(2, 3);  // all-zero weights capture nothing
    REQUIRE(orthonormal_error(wp, 4.2) == 4.2);

    // a perfect linear fit drives the error to zero
    std::mt19937 rng(71);
    const std::size_t nu = 4, nv = 40;
    const Matrix x = oracles::random_matrix(nv, nu, rng);
    const Matrix w_true = oracles::random_matrix(1, nu, rng);
    Matrix t(nv, 1);
    for (std::size_t p = 0; p < nv; ++p) {
        double acc = 0.0;
        for (std::size_t k = 0; k < nu; ++k) acc += w_true(0, k) * x(p, k);
        t(p, 0) = acc;
    }
    Matrix r(nu, nu), c(nu, 1);
    for (std::size_t i = 0; i < nu; ++i) {
        for (std::size_t j = 0; j < nu; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < nv; ++p) acc += x(p, i) * x(p, j);
            r(i, j) = acc / static_cast<double>(nv);
        }
        double acc = 0.0;
        for (std::size_t p = 0; p < nv; ++p) acc += x(p, i) * t(p, 0);
        c(i, 0) = acc / static_cast<double>(nv);
    }
    const OrthoFactorization f = orthonormalize(r);
    const Matrix wp_fit = orthonormal_weights(f, c);
    double energy = 0.0;
    for (double v : t.values()) energy += v * v;
    energy /= static_cast<double>(nv);
    REQUIRE(std::abs(orthonormal_error(wp_fit, energy)) <= 1e-8);
}

TEST_CASE("each accepted basis function never increases the error", "[ols]") {
    std::mt19937 rng(83);
    const std::size_t nu = 8;
    const Matrix r = oracles::random_spd(nu, rng, 0.5, 3.0);
    const Matrix c = oracles::random_matrix(nu, 2, rng);
    const OrthoFactorization f = orthonormalize(r);
    const Matrix wp = orthonormal_weights(f, c);
    const double energy = 100.0;  // arbitrary offset; only monotonicity matters
    double prev = energy;
    for (std::size_t upto = 0; upto < nu; ++upto) {
        Matrix truncated(wp.rows(), wp.cols());
        for (std::size_t i = 0; i < wp.rows(); ++i)
            for (std::size_t m = 0; m <= upto; ++m) truncated(i, m) = wp(i, m);
        const double e = orthonormal_error(truncated, energy);
        REQUIRE(e <= prev + 1e-12);
        prev = e;
    }
}
