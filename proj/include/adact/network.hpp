#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "activation.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "parallel.hpp"

namespace adact {

/// Single-hidden-layer MLP with input-to-output bypass connections and one
/// trainable piecewise-linear activation per hidden unit.
///
/// The augmented pattern vector is ordered [inputs | hidden activations | 1],
/// which fixes the row/column convention of the correlation system and the
/// output weight matrix W_o = [W_oi-inputs | W_oh | W_oi-threshold].
struct MlpNetwork {
    std::size_t n_in = 0;      ///< N
    std::size_t n_hidden = 0;  ///< N_h
    std::size_t n_out = 0;     ///< M
    Matrix W;                  ///< N_h x (N+1), last column is the hidden threshold
    Matrix W_oh;               ///< M x N_h
    Matrix W_oi;               ///< M x (N+1), last column is the output threshold
    ActivationBank bank;       ///< empty until a priming pass fits the hinge ranges

    std::size_t basis_count() const { return n_in + n_hidden + 1; }  ///< N_u
};

// Input weights are zero-mean Gaussian; output weights start at zero and are
// produced by the first OWO solve.
inline MlpNetwork init_network(std::size_t n_in, std::size_t n_hidden, std::size_t n_out,
                               std::uint32_t seed, double sigma) {
    if (n_in == 0 || n_hidden == 0 || n_out == 0) throw Error("network dimensions must be positive");
    MlpNetwork net;
    net.n_in = n_in;
    net.n_hidden = n_hidden;
    net.n_out = n_out;
    net.W = Matrix(n_hidden, n_in + 1);
    net.W_oh = Matrix(n_out, n_hidden);
    net.W_oi = Matrix(n_out, n_in + 1);
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& w : net.W.values()) w = sigma * gauss(rng);
    return net;
}

// Hidden-layer net values only: nets = [X | 1] * W^T. Usable before the
// activation bank exists (the priming pass fits hinge ranges from these).
inline Matrix hidden_nets(const MlpNetwork& net, const Matrix& X) {
    if (X.cols() != net.n_in) throw Error("input column count does not match network");
    Matrix nets(X.rows(), net.n_hidden);
    for_each_chunk(X.rows(), [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t p = b; p < e; ++p) {
            const double* x = X.row(p);
            for (std::size_t k = 0; k < net.n_hidden; ++k) {
                const double* w = net.W.row(k);
                double acc = w[net.n_in];
                for (std::size_t j = 0; j < net.n_in; ++j) acc += w[j] * x[j];
                nets(p, k) = acc;
            }
        }
    });
    return nets;
}

/// Everything one forward pass produces, kept because OWO, the gradients,
/// and the learning-factor solves all reuse it.
struct ForwardCache {
    Matrix nets;  ///< N_v x N_h
    Matrix acts;  ///< N_v x N_h
    Matrix xa;    ///< N_v x N_u augmented patterns [x | o | 1]
    Matrix Y;     ///< N_v x M
};

// Recompute outputs from an existing cache; valid as long as W and the bank
// (hence xa) have not changed since the cache was built.
inline Matrix outputs_from_cache(const MlpNetwork& net, const ForwardCache& cache) {
    const std::size_t nu = net.basis_count();
    Matrix Y(cache.xa.rows(), net.n_out);
    for_each_chunk(cache.xa.rows(), [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t p = b; p < e; ++p) {
            const double* xa = cache.xa.row(p);
            for (std::size_t i = 0; i < net.n_out; ++i) {
                double acc = 0.0;
                const double* woi = net.W_oi.row(i);
                for (std::size_t j = 0; j < net.n_in; ++j) acc += woi[j] * xa[j];
                const double* woh = net.W_oh.row(i);
                for (std::size_t k = 0; k < net.n_hidden; ++k) acc += woh[k] * xa[net.n_in + k];
                acc += woi[net.n_in] * xa[nu - 1];
                Y(p, i) = acc;
            }
        }
    });
    return Y;
}

inline ForwardCache forward(const MlpNetwork& net, const Matrix& X) {
    if (X.cols() != net.n_in) throw Error("input column count does not match network");
    if (net.bank.size() != net.n_hidden)
        throw Error("activation bank not initialized; run the priming pass first");
    for (std::size_t p = 0; p < X.rows(); ++p)
        for (std::size_t j = 0; j < X.cols(); ++j)
            if (!std::isfinite(X(p, j))) throw InvalidInputError(p);

    ForwardCache cache;
    cache.nets = hidden_nets(net, X);
    cache.acts = Matrix(X.rows(), net.n_hidden);
    cache.xa = Matrix(X.rows(), net.basis_count());
    for_each_chunk(X.rows(), [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t p = b; p < e; ++p) {
            double* xa = cache.xa.row(p);
            for (std::size_t j = 0; j < net.n_in; ++j) xa[j] = X(p, j);
            for (std::size_t k = 0; k < net.n_hidden; ++k) {
                const double o = evaluate(net.bank.unit(k), cache.nets(p, k));
                cache.acts(p, k) = o;
                xa[net.n_in + k] = o;
            }
            xa[net.basis_count() - 1] = 1.0;
        }
    });
    cache.Y = outputs_from_cache(net, cache);
    return cache;
}

/// Averaged autocorrelation R = (1/N_v) sum xa xa^T and cross-correlation
/// C = (1/N_v) sum xa t^T of the augmented patterns.
struct CorrelationSystem {
    Matrix R;  ///< N_u x N_u, symmetric positive semidefinite
    Matrix C;  ///< N_u x M
};

inline CorrelationSystem build_correlations(const ForwardCache& cache, const Matrix& T) {
    if (T.rows() != cache.xa.rows()) throw Error("pattern counts of cache and targets differ");
    const std::size_t nv = cache.xa.rows();
    const std::size_t nu = cache.xa.cols();
    const std::size_t m = T.cols();

    struct Partial {
        Matrix R, C;
    };
    Partial total = chunked_reduce<Partial>(
        nv, Partial{Matrix(nu, nu), Matrix(nu, m)},
        [&](std::size_t b, std::size_t e) {
            Partial part{Matrix(nu, nu), Matrix(nu, m)};
            for (std::size_t p = b; p < e; ++p) {
                const double* xa = cache.xa.row(p);
                const double* t = T.row(p);
                for (std::size_t q = 0; q < nu; ++q) {
                    const double xq = xa[q];
                    double* rrow = part.R.row(q);
                    for (std::size_t l = q; l < nu; ++l) rrow[l] += xq * xa[l];
                    double* crow = part.C.row(q);
                    for (std::size_t i = 0; i < m; ++i) crow[i] += xq * t[i];
                }
            }
            return part;
        },
        [](Partial acc, const Partial& part) {
            for (std::size_t i = 0; i < acc.R.values().size(); ++i)
                acc.R.values()[i] += part.R.values()[i];
            for (std::size_t i = 0; i < acc.C.values().size(); ++i)
                acc.C.values()[i] += part.C.values()[i];
            return acc;
        });

    CorrelationSystem sys{std::move(total.R), std::move(total.C)};
    const double scale = 1.0 / static_cast<double>(nv);
    for (std::size_t q = 0; q < nu; ++q)
        for (std::size_t l = q; l < nu; ++l) {
            const double v = sys.R(q, l) * scale;
            sys.R(q, l) = v;
            sys.R(l, q) = v;
        }
    for (double& v : sys.C.values()) v *= scale;
    return sys;
}

inline double mse(const Matrix& Y, const Matrix& T) {
    if (Y.rows() == 0) throw EmptyDatasetError();
    if (Y.rows() != T.rows() || Y.cols() != T.cols()) throw Error("output/target shape mismatch");
    double total = chunked_reduce<double>(
        Y.rows(), 0.0,
        [&](std::size_t b, std::size_t e) {
            double acc = 0.0;
            for (std::size_t p = b; p < e; ++p)
                for (std::size_t i = 0; i < Y.cols(); ++i) {
                    const double d = T(p, i) - Y(p, i);
                    acc += d * d;
                }
            return acc;
        },
        [](double acc, double part) { return acc + part; });
    return total / static_cast<double>(Y.rows());
}

// Percentage of patterns whose predicted argmax class differs from the true
// one. Ties resolve to the lowest index.
inline double pe(const Matrix& Y, const Matrix& T) {
    if (Y.rows() == 0) throw EmptyDatasetError();
    if (Y.rows() != T.rows() || Y.cols() != T.cols()) throw Error("output/target shape mismatch");
    auto argmax = [](const double* v, std::size_t n) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (v[i] > v[best]) best = i;
        return best;
    };
    double wrong = chunked_reduce<double>(
        Y.rows(), 0.0,
        [&](std::size_t b, std::size_t e) {
            double acc = 0.0;
            for (std::size_t p = b; p < e; ++p)
                if (argmax(Y.row(p), Y.cols()) != argmax(T.row(p), T.cols())) acc += 1.0;
            return acc;
        },
        [](double acc, double part) { return acc + part; });
    return 100.0 * wrong / static_cast<double>(Y.rows());
}

}  // namespace adact
