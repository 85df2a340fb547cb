#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace adact {

/// Counts floating-point multiplies (divisions included) executed by the
/// OLS solve path, for cross-checking against the closed-form burden model.
struct MultiplyCounter {
    std::uint64_t count = 0;
    void add(std::uint64_t n) { count += n; }
};

/// Triangular change of basis produced by the orthonormalization recursion.
/// Row m holds the coefficients a_mk (k <= m) expressing the m-th
/// orthonormal basis function in terms of the original ones. Rows of basis
/// functions found linearly dependent are zero and flagged not accepted.
struct OrthoFactorization {
    Matrix A;                    ///< N_u x N_u, lower triangular
    std::vector<char> accepted;  ///< per basis function
    double tau = 0.0;            ///< dependence threshold actually used

    std::size_t valid_count() const {
        std::size_t n = 0;
        for (char c : accepted) n += (c != 0);
        return n;
    }
};

// Scale-aware dependence threshold: 1e-10 * trace(R) / N_u.
inline double dependence_threshold(const Matrix& R) {
    double tr = 0.0;
    for (std::size_t i = 0; i < R.rows(); ++i) tr += R(i, i);
    return 1e-10 * tr / static_cast<double>(R.rows());
}

// Gram-Schmidt in correlation form. For each new basis function m:
//   c_i = sum_q a_iq r(q,m)           projection onto accepted basis i < m
//   d   = r(m,m) - sum_i c_i^2        residual energy
//   b_m = 1,  b_k = -sum_{i>=k} c_i a_ik
//   a_mk = b_k / sqrt(d)
// d <= tau flags the basis as dependent and skips it. The first basis has
// no predecessors, so a degenerate r(1,1) is an error unless the caller
// asks for it to be skipped like any other dependent basis.
inline OrthoFactorization orthonormalize(const Matrix& R, MultiplyCounter* mc = nullptr,
                                         bool skip_degenerate_first = false) {
    const std::size_t nu = R.rows();
    if (nu == 0 || R.cols() != nu) throw Error("orthonormalize requires a square matrix");
    if (!R.all_finite()) throw Error("orthonormalize requires finite entries");

    OrthoFactorization f;
    f.A = Matrix(nu, nu);
    f.accepted.assign(nu, 0);
    f.tau = dependence_threshold(R);

    std::uint64_t mults = 0;
    std::vector<double> c(nu), b(nu);
    for (std::size_t m = 0; m < nu; ++m) {
        double energy = R(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            double proj = 0.0;
            for (std::size_t q = 0; q <= i; ++q) proj += f.A(i, q) * R(q, m);
            mults += i + 1;
            c[i] = proj;
            energy -= proj * proj;
        }
        mults += m;
        if (!(energy > f.tau)) {
            if (m == 0 && !skip_degenerate_first) throw FirstBasisDegenerateError();
            continue;  // dependent basis, row stays zero
        }
        b[m] = 1.0;
        for (std::size_t k = m; k-- > 0;) {
            double acc = 0.0;
            for (std::size_t i = k; i < m; ++i) acc += c[i] * f.A(i, k);
            mults += m - k;
            b[k] = -acc;
        }
        const double inv_norm = 1.0 / std::sqrt(energy);
        mults += 1;
        for (std::size_t k = 0; k <= m; ++k) f.A(m, k) = b[k] * inv_norm;
        mults += m + 1;
        f.accepted[m] = 1;
    }
    if (mc) mc->add(mults);
    return f;
}

// Weights of the orthonormal system: w'(i,m) = sum_k a_mk c(k,i).
// Returned as M x N_u; columns of skipped basis functions are zero.
inline Matrix orthonormal_weights(const OrthoFactorization& f, const Matrix& C,
                                  MultiplyCounter* mc = nullptr) {
    const std::size_t nu = f.A.rows();
    if (C.rows() != nu) throw Error("correlation matrix row count does not match factorization");
    const std::size_t m_out = C.cols();
    Matrix wp(m_out, nu);
    std::uint64_t mults = 0;
    for (std::size_t m = 0; m < nu; ++m) {
        if (!f.accepted[m]) continue;
        for (std::size_t i = 0; i < m_out; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k <= m; ++k) acc += f.A(m, k) * C(k, i);
            mults += m + 1;
            wp(i, m) = acc;
        }
    }
    if (mc) mc->add(mults);
    return wp;
}

// Map orthonormal-system weights back: w_o(i,k) = sum_{m>=k} a_mk w'(i,m).
inline Matrix map_back(const OrthoFactorization& f, const Matrix& w_prime,
                       MultiplyCounter* mc = nullptr) {
    const std::size_t nu = f.A.rows();
    const std::size_t m_out = w_prime.rows();
    Matrix w(m_out, nu);
    std::uint64_t mults = 0;
    for (std::size_t i = 0; i < m_out; ++i)
        for (std::size_t k = 0; k < nu; ++k) {
            double acc = 0.0;
            for (std::size_t m = k; m < nu; ++m) {
                if (!f.accepted[m]) continue;
                acc += f.A(m, k) * w_prime(i, m);
                ++mults;
            }
            w(i, k) = acc;
        }
    if (mc) mc->add(mults);
    return w;
}

/// Least-squares solve of R * W_o^T = C. Rank deficiency is handled by
/// skipping dependent basis functions, which receive zero weight, so the
/// result is always finite and reproduces the minimum-residual fit.
inline Matrix solve_via_ols(const Matrix& R, const Matrix& C, MultiplyCounter* mc = nullptr) {
    OrthoFactorization f = orthonormalize(R, mc, /*skip_degenerate_first=*/true);
    Matrix wp = orthonormal_weights(f, C, mc);
    return map_back(f, wp, mc);
}

/// Training MSE expressed in the orthonormal system: target energy minus the
/// energy captured by the accepted basis functions. `target_energy` is
/// (1/N_v) sum_p sum_i t_p(i)^2.
inline double orthonormal_error(const Matrix& w_prime, double target_energy) {
    double captured = 0.0;
    for (double v : w_prime.values()) captured += v * v;
    const double e = target_energy - captured;
    if (e < -1e-8 * std::max(1.0, target_energy))
        std::cerr << "adact: orthonormal_error is negative (" << e
                  << "); the correlation system is badly conditioned\n";
    return e;
}

}  // namespace adact
