#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "activation.hpp"
#include "burden.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "network.hpp"
#include "ols.hpp"
#include "parallel.hpp"

namespace adact {

enum class TrainerKind { AdAct, Molf, Cg, Scg };
enum class ActOptimizer { Olf, Adam };

inline const char* trainer_name(TrainerKind t) {
    switch (t) {
        case TrainerKind::AdAct: return "adact";
        case TrainerKind::Molf: return "molf";
        case TrainerKind::Cg: return "cg";
        case TrainerKind::Scg: return "scg";
    }
    return "?";
}

inline TrainerKind trainer_from_name(const std::string& name) {
    if (name == "adact") return TrainerKind::AdAct;
    if (name == "molf") return TrainerKind::Molf;
    if (name == "cg") return TrainerKind::Cg;
    if (name == "scg") return TrainerKind::Scg;
    throw Error("unknown trainer '" + name + "'");
}

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double rate = 0.01;
};

struct TrainConfig {
    TrainerKind trainer = TrainerKind::AdAct;
    std::size_t iterations = 100;  ///< N_it
    std::size_t hidden_units = 10;
    std::size_t hinges = 20;  ///< H
    Reference init_activation = Reference::Sigmoid;
    double leaky_slope = kDefaultLeakySlope;
    ActOptimizer act_optimizer = ActOptimizer::Olf;
    AdamParams adam;
    std::uint32_t seed = 1;
    double init_sigma = 1.0;
    double range_margin = 0.05;

    void validate() const {
        if (iterations < 1) throw Error("iteration budget must be at least 1");
        if (hinges < 2) throw InvalidHingeCountError(hinges);
        if (hidden_units < 1) throw Error("need at least one hidden unit");
    }
};

struct IterationRecord {
    std::size_t iteration = 0;  ///< 1-based
    double train_mse = 0.0;
    double val_mse = std::numeric_limits<double>::quiet_NaN();
    double val_pe = std::numeric_limits<double>::quiet_NaN();
    double z_act = 0.0;        ///< activation learning factor actually applied
    double z_molf_rms = 0.0;   ///< RMS of the per-unit learning factors applied
    double mse_before_owo = std::numeric_limits<double>::quiet_NaN();
    double mse_after_owo = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t multiplies_cumulative = 0;
};

struct TrainRun {
    std::vector<IterationRecord> records;
};

// Safeguards the paper leaves unstated.
inline constexpr double kCurvatureFloor = 1e-12;  // tau_curv
inline constexpr int kMaxStepHalvings = 10;

inline double fallback_learning_factor(std::size_t iteration) {
    return 0.1 / (1.0 + static_cast<double>(iteration));
}

// ---------------------------------------------------------------------------
// Shared per-pattern helpers

// Hinge assignment of one net value with the clamp regions folded onto the
// end hinges: a saturated pattern pushes its whole weight onto hinge 1 or H,
// which keeps saturated units trainable.
struct HingePick {
    std::size_t lo = 0, hi = 0;
    double w_lo = 0.0, w_hi = 0.0;
};

inline HingePick pick_hinges(const PiecewiseLinearActivation& pla, double n) {
    if (n < pla.grid.r) return {0, 0, 1.0, 0.0};
    if (n > pla.grid.s) {
        const std::size_t last = pla.grid.hinge_count() - 1;
        return {last, last, 1.0, 0.0};
    }
    const Located loc = locate(n, pla.grid);
    return {loc.m1, loc.m2, loc.w1, loc.w2};
}

// err_dot(k) = sum_i (t_p(i) - y_p(i)) w_oh(i,k) for one pattern.
inline void error_dot_hidden(const MlpNetwork& net, const double* t, const double* y,
                             std::vector<double>& out) {
    out.assign(net.n_hidden, 0.0);
    for (std::size_t i = 0; i < net.n_out; ++i) {
        const double d = t[i] - y[i];
        const double* woh = net.W_oh.row(i);
        for (std::size_t k = 0; k < net.n_hidden; ++k) out[k] += d * woh[k];
    }
}

// ---------------------------------------------------------------------------
// Priming

// Fits the fixed hinge grids from the net values of the freshly initialized
// input weights, then drops reference-initialized heights onto them. The
// grids never change after this.
inline void prime_network(MlpNetwork& net, const Matrix& X, const TrainConfig& cfg) {
    const Matrix nets = hidden_nets(net, X);
    std::vector<UnitRange> ranges;
    try {
        ranges = fit_ranges(nets, cfg.range_margin);
    } catch (const DegenerateUnitError& e) {
        throw DegenerateUnitError(e.unit,
                                  "Reseed the run or reduce the hidden unit count.");
    }
    net.bank = make_bank(ranges, cfg.hinges, cfg.init_activation, cfg.leaky_slope);
}

// ---------------------------------------------------------------------------
// OWO

// Replaces all output-layer weights with the exact least-squares solution of
// R W_o^T = C over the current augmented patterns. Never increases the
// training MSE.
inline void owo_step(MlpNetwork& net, const ForwardCache& cache, const Matrix& T,
                     MultiplyCounter* mc = nullptr) {
    const CorrelationSystem sys = build_correlations(cache, T);
    const Matrix w_o = solve_via_ols(sys.R, sys.C, mc);
    if (!w_o.all_finite()) throw NumericError("OWO produced a non-finite output weight");
    for (std::size_t i = 0; i < net.n_out; ++i) {
        for (std::size_t j = 0; j < net.n_in; ++j) net.W_oi(i, j) = w_o(i, j);
        for (std::size_t k = 0; k < net.n_hidden; ++k) net.W_oh(i, k) = w_o(i, net.n_in + k);
        net.W_oi(i, net.n_in) = w_o(i, net.basis_count() - 1);
    }
}

// ---------------------------------------------------------------------------
// Input-weight gradient and MOLF

// Negative MSE gradient with respect to the input weights, N_h x (N+1).
// Backpropagates through the activation interval slope at each pattern.
inline Matrix input_weight_gradient(const MlpNetwork& net, const ForwardCache& cache,
                                    const Matrix& T) {
    const std::size_t nv = cache.xa.rows();
    const std::size_t cols = net.n_in + 1;
    Matrix total = chunked_reduce<Matrix>(
        nv, Matrix(net.n_hidden, cols),
        [&](std::size_t b, std::size_t e) {
            Matrix g(net.n_hidden, cols);
            std::vector<double> err_dot;
            for (std::size_t p = b; p < e; ++p) {
                error_dot_hidden(net, T.row(p), cache.Y.row(p), err_dot);
                const double* xa = cache.xa.row(p);
                for (std::size_t k = 0; k < net.n_hidden; ++k) {
                    const double f = err_dot[k] * slope(net.bank.unit(k), cache.nets(p, k));
                    if (f == 0.0) continue;
                    double* grow = g.row(k);
                    for (std::size_t j = 0; j < net.n_in; ++j) grow[j] += f * xa[j];
                    grow[net.n_in] += f;
                }
            }
            return g;
        },
        [](Matrix acc, const Matrix& part) {
            for (std::size_t i = 0; i < acc.values().size(); ++i)
                acc.values()[i] += part.values()[i];
            return acc;
        });
    const double scale = 2.0 / static_cast<double>(nv);
    for (double& v : total.values()) v *= scale;
    return total;
}

struct MolfStep {
    std::vector<double> z;  ///< learning factor per hidden unit, as applied
    int halvings = 0;
    bool applied = false;
};

// One MOLF update: solve the Gauss-Newton system H_molf z = g_molf for an
// N_h-dimensional learning factor vector, then move each input weight row
// along its gradient row, W_k += z_k G_k. If the step raises the error it is
// halved up to kMaxStepHalvings times, then skipped.
inline MolfStep molf_step(MlpNetwork& net, const Matrix& X, const Matrix& T,
                          const ForwardCache& cache, const Matrix& G,
                          MultiplyCounter* mc = nullptr) {
    const std::size_t nv = X.rows();
    const std::size_t nh = net.n_hidden;
    MolfStep result;
    result.z.assign(nh, 0.0);

    // d_pk = f'(n_pk) * (G_k . [x_p; 1]) is the first-order net change per
    // unit learning factor; g and H follow from y's linearity in it.
    struct Partial {
        std::vector<double> g;
        Matrix dd;  // sum_p d_pk d_pj
    };
    Partial total = chunked_reduce<Partial>(
        nv, Partial{std::vector<double>(nh, 0.0), Matrix(nh, nh)},
        [&](std::size_t b, std::size_t e) {
            Partial part{std::vector<double>(nh, 0.0), Matrix(nh, nh)};
            std::vector<double> err_dot, d(nh);
            for (std::size_t p = b; p < e; ++p) {
                const double* xa = cache.xa.row(p);
                for (std::size_t k = 0; k < nh; ++k) {
                    const double* grow = G.row(k);
                    double dn = grow[net.n_in];
                    for (std::size_t j = 0; j < net.n_in; ++j) dn += grow[j] * xa[j];
                    d[k] = slope(net.bank.unit(k), cache.nets(p, k)) * dn;
                }
                error_dot_hidden(net, T.row(p), cache.Y.row(p), err_dot);
                for (std::size_t k = 0; k < nh; ++k) {
                    part.g[k] += err_dot[k] * d[k];
                    for (std::size_t j = k; j < nh; ++j) part.dd(k, j) += d[k] * d[j];
                }
            }
            return part;
        },
        [](Partial acc, const Partial& part) {
            for (std::size_t k = 0; k < acc.g.size(); ++k) acc.g[k] += part.g[k];
            for (std::size_t i = 0; i < acc.dd.values().size(); ++i)
                acc.dd.values()[i] += part.dd.values()[i];
            return acc;
        });

    const double scale = 2.0 / static_cast<double>(nv);
    bool any = false;
    for (double& v : total.g) {
        v *= scale;
        if (v != 0.0) any = true;
    }
    if (!any) return result;  // zero gradient along every row: no-op

    Matrix gram(nh, nh);
    for (std::size_t k = 0; k < nh; ++k)
        for (std::size_t j = 0; j < nh; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < net.n_out; ++i) acc += net.W_oh(i, k) * net.W_oh(i, j);
            gram(k, j) = acc;
        }
    Matrix h_molf(nh, nh);
    for (std::size_t k = 0; k < nh; ++k)
        for (std::size_t j = 0; j < nh; ++j) {
            const double dd = j >= k ? total.dd(k, j) : total.dd(j, k);
            h_molf(k, j) = gram(k, j) * dd * scale;
        }

    Matrix rhs(nh, 1);
    for (std::size_t k = 0; k < nh; ++k) rhs(k, 0) = total.g[k];
    const Matrix solved = solve_via_ols(h_molf, rhs, mc);
    std::vector<double> z(nh);
    for (std::size_t k = 0; k < nh; ++k) z[k] = solved(0, k);

    const double e0 = mse(cache.Y, T);
    const Matrix w_saved = net.W;
    double factor = 1.0;
    for (int attempt = 0; attempt <= kMaxStepHalvings; ++attempt) {
        for (std::size_t k = 0; k < nh; ++k)
            for (std::size_t j = 0; j <= net.n_in; ++j)
                net.W(k, j) = w_saved(k, j) + factor * z[k] * G(k, j);
        if (!net.W.all_finite()) throw NumericError("MOLF produced a non-finite input weight");
        const ForwardCache trial = forward(net, X);
        if (mse(trial.Y, T) <= e0) {
            result.applied = true;
            result.halvings = attempt;
            for (std::size_t k = 0; k < nh; ++k) result.z[k] = factor * z[k];
            return result;
        }
        factor *= 0.5;
    }
    net.W = w_saved;  // no usable step
    return result;
}

// ---------------------------------------------------------------------------
// Activation training

// Negative gradient of the MSE with respect to every trainable height,
// N_h x H. A pattern deposits its error mass on the two hinges bracketing
// its net value; saturated patterns deposit on the end hinge.
inline Matrix activation_gradient(const MlpNetwork& net, const ForwardCache& cache,
                                  const Matrix& T) {
    const std::size_t nv = cache.xa.rows();
    const std::size_t h = net.bank.hinge_count();
    Matrix total = chunked_reduce<Matrix>(
        nv, Matrix(net.n_hidden, h),
        [&](std::size_t b, std::size_t e) {
            Matrix g(net.n_hidden, h);
            std::vector<double> err_dot;
            for (std::size_t p = b; p < e; ++p) {
                error_dot_hidden(net, T.row(p), cache.Y.row(p), err_dot);
                for (std::size_t u = 0; u < net.n_hidden; ++u) {
                    const HingePick pick = pick_hinges(net.bank.unit(u), cache.nets(p, u));
                    g(u, pick.lo) += err_dot[u] * pick.w_lo;
                    if (pick.hi != pick.lo) g(u, pick.hi) += err_dot[u] * pick.w_hi;
                }
            }
            return g;
        },
        [](Matrix acc, const Matrix& part) {
            for (std::size_t i = 0; i < acc.values().size(); ++i)
                acc.values()[i] += part.values()[i];
            return acc;
        });
    const double scale = 2.0 / static_cast<double>(nv);
    for (double& v : total.values()) v *= scale;
    return total;
}

struct ActivationOlf {
    double z = 0.0;
    double dE_dz = 0.0;
    double d2E_dz2 = 0.0;
    bool used_fallback = false;
};

// Newton learning factor for the height update A += z G_a. The outputs are
// linear in z, so the Gauss-Newton second partial is exact and the step
// lands on the line minimum whenever the curvature is usable.
inline ActivationOlf activation_olf(const MlpNetwork& net, const ForwardCache& cache,
                                    const Matrix& T, const Matrix& g_a,
                                    std::size_t iteration) {
    const std::size_t nv = cache.xa.rows();
    struct Sums {
        double num = 0.0, den = 0.0;
    };
    Sums total = chunked_reduce<Sums>(
        nv, Sums{},
        [&](std::size_t b, std::size_t e) {
            Sums part;
            std::vector<double> phi(net.n_hidden);
            for (std::size_t p = b; p < e; ++p) {
                for (std::size_t k = 0; k < net.n_hidden; ++k) {
                    const HingePick pick = pick_hinges(net.bank.unit(k), cache.nets(p, k));
                    phi[k] = pick.w_lo * g_a(k, pick.lo);
                    if (pick.hi != pick.lo) phi[k] += pick.w_hi * g_a(k, pick.hi);
                }
                const double* t = T.row(p);
                const double* y = cache.Y.row(p);
                for (std::size_t i = 0; i < net.n_out; ++i) {
                    double psi = 0.0;
                    const double* woh = net.W_oh.row(i);
                    for (std::size_t k = 0; k < net.n_hidden; ++k) psi += woh[k] * phi[k];
                    part.num += (t[i] - y[i]) * psi;
                    part.den += psi * psi;
                }
            }
            return part;
        },
        [](Sums acc, const Sums& part) {
            acc.num += part.num;
            acc.den += part.den;
            return acc;
        });

    const double scale = 2.0 / static_cast<double>(nv);
    ActivationOlf out;
    out.dE_dz = -scale * total.num;
    out.d2E_dz2 = scale * total.den;
    if (out.dE_dz == 0.0) {
        out.z = 0.0;
    } else if (out.d2E_dz2 <= kCurvatureFloor) {
        out.z = fallback_learning_factor(iteration);
        out.used_fallback = true;
    } else {
        out.z = -out.dE_dz / out.d2E_dz2;
    }
    return out;
}

// A += z G_a. Hinge grids are untouched.
inline void update_activations(ActivationBank& bank, const Matrix& g_a, double z) {
    for (std::size_t u = 0; u < bank.size(); ++u) {
        auto& a = bank.unit(u).a;
        for (std::size_t m = 0; m < a.size(); ++m) {
            a[m] += z * g_a(u, m);
            if (!std::isfinite(a[m]))
                throw NumericError("activation update produced a non-finite height at unit " +
                                   std::to_string(u) + ", hinge " + std::to_string(m) +
                                   " (z=" + std::to_string(z) + ")");
        }
    }
}

struct AdamState {
    Matrix m1;  // first-moment estimate, N_h x H
    Matrix m2;  // second-moment estimate
    std::uint64_t step = 0;
};

// Adam step along the negative gradient G_a; returns the mean |height change|.
inline double adam_update_activations(ActivationBank& bank, const Matrix& g_a, AdamState& state,
                                      const AdamParams& prm) {
    if (state.m1.empty()) {
        state.m1 = Matrix(g_a.rows(), g_a.cols());
        state.m2 = Matrix(g_a.rows(), g_a.cols());
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(prm.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(prm.beta2, static_cast<double>(state.step));
    double moved = 0.0;
    for (std::size_t u = 0; u < bank.size(); ++u) {
        auto& a = bank.unit(u).a;
        for (std::size_t m = 0; m < a.size(); ++m) {
            const double g = g_a(u, m);
            state.m1(u, m) = prm.beta1 * state.m1(u, m) + (1.0 - prm.beta1) * g;
            state.m2(u, m) = prm.beta2 * state.m2(u, m) + (1.0 - prm.beta2) * g * g;
            const double mhat = state.m1(u, m) / bc1;
            const double vhat = state.m2(u, m) / bc2;
            const double delta = prm.rate * mhat / (std::sqrt(vhat) + prm.eps);
            a[m] += delta;
            moved += std::abs(delta);
            if (!std::isfinite(a[m]))
                throw NumericError("Adam update produced a non-finite height at unit " +
                                   std::to_string(u) + ", hinge " + std::to_string(m));
        }
    }
    return moved / static_cast<double>(g_a.rows() * g_a.cols());
}

// MSE when the heights move but nets (hence hinge assignments) stay put.
inline double mse_with_heights(const MlpNetwork& net, const ForwardCache& cache, const Matrix& T,
                               const ActivationBank& bank) {
    const std::size_t nv = cache.xa.rows();
    double total = chunked_reduce<double>(
        nv, 0.0,
        [&](std::size_t b, std::size_t e) {
            double acc = 0.0;
            std::vector<double> o(net.n_hidden);
            for (std::size_t p = b; p < e; ++p) {
                for (std::size_t k = 0; k < net.n_hidden; ++k)
                    o[k] = evaluate(bank.unit(k), cache.nets(p, k));
                const double* xa = cache.xa.row(p);
                const double* t = T.row(p);
                for (std::size_t i = 0; i < net.n_out; ++i) {
                    const double* woi = net.W_oi.row(i);
                    double y = woi[net.n_in];
                    for (std::size_t j = 0; j < net.n_in; ++j) y += woi[j] * xa[j];
                    const double* woh = net.W_oh.row(i);
                    for (std::size_t k = 0; k < net.n_hidden; ++k) y += woh[k] * o[k];
                    const double d = t[i] - y;
                    acc += d * d;
                }
            }
            return acc;
        },
        [](double acc, double part) { return acc + part; });
    return total / static_cast<double>(nv);
}

// Applies the OLF height step with the halving safeguard; returns the
// learning factor actually used (0 when the step was skipped).
inline double apply_activation_step(MlpNetwork& net, const ForwardCache& cache, const Matrix& T,
                                    const Matrix& g_a, double z) {
    if (z == 0.0) return 0.0;
    const double e0 = mse(cache.Y, T);
    double factor = 1.0;
    for (int attempt = 0; attempt <= kMaxStepHalvings; ++attempt) {
        ActivationBank candidate = net.bank;
        update_activations(candidate, g_a, factor * z);
        if (mse_with_heights(net, cache, T, candidate) <= e0) {
            net.bank = std::move(candidate);
            return factor * z;
        }
        factor *= 0.5;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Conjugate-gradient trainers

// Gradient of the MSE over every weight block (positive gradient, not the
// descent direction).
struct FullGradient {
    Matrix W;     // N_h x (N+1)
    Matrix W_oh;  // M x N_h
    Matrix W_oi;  // M x (N+1)

    double norm2() const {
        double acc = 0.0;
        for (double v : W.values()) acc += v * v;
        for (double v : W_oh.values()) acc += v * v;
        for (double v : W_oi.values()) acc += v * v;
        return acc;
    }
};

inline FullGradient full_gradient(const MlpNetwork& net, const ForwardCache& cache,
                                  const Matrix& T) {
    FullGradient g;
    g.W = input_weight_gradient(net, cache, T);
    for (double& v : g.W.values()) v = -v;  // back to a true gradient

    const std::size_t nv = cache.xa.rows();
    struct Partial {
        Matrix oh, oi;
    };
    Partial total = chunked_reduce<Partial>(
        nv, Partial{Matrix(net.n_out, net.n_hidden), Matrix(net.n_out, net.n_in + 1)},
        [&](std::size_t b, std::size_t e) {
            Partial part{Matrix(net.n_out, net.n_hidden), Matrix(net.n_out, net.n_in + 1)};
            for (std::size_t p = b; p < e; ++p) {
                const double* xa = cache.xa.row(p);
                const double* t = T.row(p);
                const double* y = cache.Y.row(p);
                for (std::size_t i = 0; i < net.n_out; ++i) {
                    const double d = t[i] - y[i];
                    double* oh = part.oh.row(i);
                    for (std::size_t k = 0; k < net.n_hidden; ++k)
                        oh[k] += d * xa[net.n_in + k];
                    double* oi = part.oi.row(i);
                    for (std::size_t j = 0; j < net.n_in; ++j) oi[j] += d * xa[j];
                    oi[net.n_in] += d;
                }
            }
            return part;
        },
        [](Partial acc, const Partial& part) {
            for (std::size_t i = 0; i < acc.oh.values().size(); ++i)
                acc.oh.values()[i] += part.oh.values()[i];
            for (std::size_t i = 0; i < acc.oi.values().size(); ++i)
                acc.oi.values()[i] += part.oi.values()[i];
            return acc;
        });
    const double scale = -2.0 / static_cast<double>(nv);
    g.W_oh = std::move(total.oh);
    g.W_oi = std::move(total.oi);
    for (double& v : g.W_oh.values()) v *= scale;
    for (double& v : g.W_oi.values()) v *= scale;
    return g;
}

struct CgState {
    FullGradient direction;  // p
    double prev_grad_norm2 = 0.0;
    bool has_direction = false;
    double scg_step = 1.0;  // heuristic step memory for SCG
    std::size_t iterations_done = 0;
};

namespace detail {

inline double dot(const Matrix& a, const Matrix& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) acc += a.values()[i] * b.values()[i];
    return acc;
}

// p <- -g + B1 p with the ratio of gradient energies of two consecutive
// iterations; plain steepest descent on the first pass.
inline void update_direction(CgState& state, const FullGradient& g, double g_norm2) {
    if (!state.has_direction || state.prev_grad_norm2 <= 0.0) {
        state.direction = g;
        for (double& v : state.direction.W.values()) v = -v;
        for (double& v : state.direction.W_oh.values()) v = -v;
        for (double& v : state.direction.W_oi.values()) v = -v;
        state.has_direction = true;
    } else {
        const double b1 = g_norm2 / state.prev_grad_norm2;
        auto blend = [b1](Matrix& p, const Matrix& grad) {
            for (std::size_t i = 0; i < p.values().size(); ++i)
                p.values()[i] = -grad.values()[i] + b1 * p.values()[i];
        };
        blend(state.direction.W, g.W);
        blend(state.direction.W_oh, g.W_oh);
        blend(state.direction.W_oi, g.W_oi);
    }
    state.prev_grad_norm2 = g_norm2;
}

// Gauss-Newton curvature of the error along direction p.
inline double directional_curvature(const MlpNetwork& net, const ForwardCache& cache,
                                    const FullGradient& p) {
    const std::size_t nv = cache.xa.rows();
    double den = chunked_reduce<double>(
        nv, 0.0,
        [&](std::size_t b, std::size_t e) {
            double acc = 0.0;
            std::vector<double> dnet(net.n_hidden);
            for (std::size_t q = b; q < e; ++q) {
                const double* xa = cache.xa.row(q);
                for (std::size_t k = 0; k < net.n_hidden; ++k) {
                    const double* pw = p.W.row(k);
                    double dn = pw[net.n_in];
                    for (std::size_t j = 0; j < net.n_in; ++j) dn += pw[j] * xa[j];
                    dnet[k] = slope(net.bank.unit(k), cache.nets(q, k)) * dn;
                }
                for (std::size_t i = 0; i < net.n_out; ++i) {
                    const double* poi = p.W_oi.row(i);
                    double psi = poi[net.n_in];
                    for (std::size_t j = 0; j < net.n_in; ++j) psi += poi[j] * xa[j];
                    const double* poh = p.W_oh.row(i);
                    const double* woh = net.W_oh.row(i);
                    for (std::size_t k = 0; k < net.n_hidden; ++k) {
                        psi += poh[k] * xa[net.n_in + k];
                        psi += woh[k] * dnet[k];
                    }
                    acc += psi * psi;
                }
            }
            return acc;
        },
        [](double acc, double part) { return acc + part; });
    return 2.0 * den / static_cast<double>(nv);
}

inline void apply_direction(MlpNetwork& net, const FullGradient& p, double z) {
    for (std::size_t i = 0; i < net.W.values().size(); ++i)
        net.W.values()[i] += z * p.W.values()[i];
    for (std::size_t i = 0; i < net.W_oh.values().size(); ++i)
        net.W_oh.values()[i] += z * p.W_oh.values()[i];
    for (std::size_t i = 0; i < net.W_oi.values().size(); ++i)
        net.W_oi.values()[i] += z * p.W_oi.values()[i];
    if (!net.W.all_finite() || !net.W_oh.all_finite() || !net.W_oi.all_finite())
        throw NumericError("conjugate-gradient step produced a non-finite weight");
}

}  // namespace detail

// One CG iteration over all weights: Fletcher-Reeves direction, Gauss-Newton
// learning factor along it, halving safeguard. Returns the step applied.
inline double cg_step(MlpNetwork& net, const Matrix& X, const Matrix& T, CgState& state) {
    ++state.iterations_done;
    const ForwardCache cache = forward(net, X);
    const FullGradient g = full_gradient(net, cache, T);
    const double g_norm2 = g.norm2();
    if (g_norm2 == 0.0) return 0.0;
    detail::update_direction(state, g, g_norm2);

    const double slope_along_p = detail::dot(g.W, state.direction.W) +
                                 detail::dot(g.W_oh, state.direction.W_oh) +
                                 detail::dot(g.W_oi, state.direction.W_oi);
    const double curvature = detail::directional_curvature(net, cache, state.direction);
    double z;
    if (curvature <= kCurvatureFloor) {
        z = fallback_learning_factor(state.iterations_done);
    } else {
        z = -slope_along_p / curvature;
    }
    if (z == 0.0) return 0.0;

    const double e0 = mse(cache.Y, T);
    for (int attempt = 0; attempt <= kMaxStepHalvings; ++attempt) {
        detail::apply_direction(net, state.direction, z);
        const ForwardCache trial = forward(net, X);
        if (mse(trial.Y, T) <= e0) return z;
        detail::apply_direction(net, state.direction, -z);
        z *= 0.5;
    }
    return 0.0;
}

// One SCG iteration: same direction rule, heuristic step control that
// doubles the remembered step after a success and halves it after failures.
inline double scg_step(MlpNetwork& net, const Matrix& X, const Matrix& T, CgState& state) {
    ++state.iterations_done;
    const ForwardCache cache = forward(net, X);
    const FullGradient g = full_gradient(net, cache, T);
    const double g_norm2 = g.norm2();
    if (g_norm2 == 0.0) return 0.0;
    detail::update_direction(state, g, g_norm2);

    const double e0 = mse(cache.Y, T);
    double z = state.scg_step;
    for (int attempt = 0; attempt <= kMaxStepHalvings; ++attempt) {
        detail::apply_direction(net, state.direction, z);
        const ForwardCache trial = forward(net, X);
        if (mse(trial.Y, T) <= e0) {
            state.scg_step = 2.0 * z;
            return z;
        }
        detail::apply_direction(net, state.direction, -z);
        z *= 0.5;
    }
    state.scg_step = z;
    return 0.0;
}

// ---------------------------------------------------------------------------
// Full training loop

struct TrainOutcome {
    MlpNetwork net;
    TrainRun run;
};

inline BurdenKind burden_kind_for(TrainerKind t) {
    switch (t) {
        case TrainerKind::AdAct: return BurdenKind::AdAct;
        case TrainerKind::Molf: return BurdenKind::Molf;
        case TrainerKind::Cg: return BurdenKind::Cg;
        case TrainerKind::Scg: return BurdenKind::Scg;
    }
    throw Error("unknown trainer");
}

// Runs the configured trainer for N_it iterations on a network the caller
// provides. The priming pass runs first when the bank is still empty; the
// hinge grids never change afterwards. AdAct iterations run MOLF, then the
// height update, then OWO, so the recorded end-of-iteration MSE sits at the
// OWO minimum.
inline TrainOutcome train_network(const TrainConfig& cfg, MlpNetwork start, const Matrix& X,
                                  const Matrix& T, const Matrix* x_val = nullptr,
                                  const Matrix* t_val = nullptr) {
    cfg.validate();
    if (X.rows() == 0) throw EmptyDatasetError();
    if (X.rows() != T.rows()) throw Error("pattern counts of inputs and targets differ");

    TrainOutcome out;
    out.net = std::move(start);
    if (out.net.bank.empty()) prime_network(out.net, X, cfg);
    MlpNetwork& net = out.net;

    BurdenInput dims;
    dims.n_in = static_cast<std::int64_t>(net.n_in);
    dims.n_hidden = static_cast<std::int64_t>(net.n_hidden);
    dims.n_out = static_cast<std::int64_t>(net.n_out);
    dims.n_patterns = static_cast<std::int64_t>(X.rows());
    dims.n_hinges = static_cast<std::int64_t>(cfg.hinges);
    const std::uint64_t per_iteration =
        static_cast<std::uint64_t>(burden(burden_kind_for(cfg.trainer), dims));

    AdamState adam_state;
    CgState cg_state;

    for (std::size_t it = 1; it <= cfg.iterations; ++it) {
        IterationRecord rec;
        rec.iteration = it;
        rec.multiplies_cumulative = per_iteration * it;

        if (cfg.trainer == TrainerKind::Cg || cfg.trainer == TrainerKind::Scg) {
            if (cfg.trainer == TrainerKind::Cg)
                cg_step(net, X, T, cg_state);
            else
                scg_step(net, X, T, cg_state);
            const ForwardCache cache = forward(net, X);
            rec.train_mse = mse(cache.Y, T);
        } else {
            ForwardCache cache = forward(net, X);
            const Matrix g = input_weight_gradient(net, cache, T);
            const MolfStep molf = molf_step(net, X, T, cache, g);
            double z2 = 0.0;
            for (double z : molf.z) z2 += z * z;
            rec.z_molf_rms = std::sqrt(z2 / static_cast<double>(molf.z.size()));
            if (molf.applied) cache = forward(net, X);

            if (cfg.trainer == TrainerKind::AdAct) {
                const Matrix g_a = activation_gradient(net, cache, T);
                if (cfg.act_optimizer == ActOptimizer::Olf) {
                    const ActivationOlf olf = activation_olf(net, cache, T, g_a, it);
                    rec.z_act = apply_activation_step(net, cache, T, g_a, olf.z);
                } else {
                    rec.z_act = adam_update_activations(net.bank, g_a, adam_state, cfg.adam);
                }
                cache = forward(net, X);
            }

            rec.mse_before_owo = mse(cache.Y, T);
            owo_step(net, cache, T);
            const Matrix y_after = outputs_from_cache(net, cache);
            rec.train_mse = mse(y_after, T);
            rec.mse_after_owo = rec.train_mse;
        }

        if (x_val && t_val && x_val->rows() > 0) {
            const ForwardCache vc = forward(net, *x_val);
            rec.val_mse = mse(vc.Y, *t_val);
            rec.val_pe = pe(vc.Y, *t_val);
        }
        out.run.records.push_back(rec);
    }
    return out;
}

// Convenience entry: initialize a fresh network from the config and train it.
inline TrainOutcome train(const TrainConfig& cfg, const Matrix& X, const Matrix& T,
                          const Matrix* x_val = nullptr, const Matrix* t_val = nullptr) {
    cfg.validate();
    MlpNetwork net =
        init_network(X.cols(), cfg.hidden_units, T.cols(), cfg.seed, cfg.init_sigma);
    return train_network(cfg, std::move(net), X, T, x_val, t_val);
}

}  // namespace adact
