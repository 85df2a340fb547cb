#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace adact {

/// Reference curves a piecewise-linear activation can be initialized from.
enum class Reference { Sigmoid, Tanh, Relu, LeakyRelu, Identity };

constexpr double kDefaultLeakySlope = 0.01;

inline double reference_value(Reference kind, double x, double leaky_slope = kDefaultLeakySlope) {
    switch (kind) {
        case Reference::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Reference::Tanh: return std::tanh(x);
        case Reference::Relu: return x > 0.0 ? x : 0.0;
        case Reference::LeakyRelu: return x > 0.0 ? x : leaky_slope * x;
        case Reference::Identity: return x;
    }
    throw Error("unknown reference activation");
}

inline const char* reference_name(Reference kind) {
    switch (kind) {
        case Reference::Sigmoid: return "sigmoid";
        case Reference::Tanh: return "tanh";
        case Reference::Relu: return "relu";
        case Reference::LeakyRelu: return "leaky_relu";
        case Reference::Identity: return "identity";
    }
    return "?";
}

inline Reference reference_from_name(const std::string& name) {
    if (name == "sigmoid") return Reference::Sigmoid;
    if (name == "tanh") return Reference::Tanh;
    if (name == "relu") return Reference::Relu;
    if (name == "leaky_relu") return Reference::LeakyRelu;
    if (name == "identity") return Reference::Identity;
    throw Error("unknown reference activation '" + name + "'");
}

/// Fixed hinge abscissae for one hidden unit: H evenly spaced points on
/// [r, s]. Immutable once built; training only moves the heights.
struct HingeGrid {
    double r = 0.0;              ///< minimum net value covered by the grid
    double s = 0.0;              ///< maximum net value covered by the grid
    double delta = 0.0;          ///< uniform spacing (s - r) / (H - 1)
    std::vector<double> ns;      ///< hinge positions, strictly increasing

    std::size_t hinge_count() const { return ns.size(); }

    bool operator==(const HingeGrid&) const = default;
};

inline HingeGrid init_hinges(double r, double s, std::size_t hinge_count) {
    if (!(s > r)) throw DegenerateRangeError(r, s);
    if (hinge_count < 2) throw InvalidHingeCountError(hinge_count);
    HingeGrid g;
    g.r = r;
    g.s = s;
    g.delta = (s - r) / static_cast<double>(hinge_count - 1);
    g.ns.resize(hinge_count);
    for (std::size_t m = 0; m < hinge_count; ++m)
        g.ns[m] = r + static_cast<double>(m) * g.delta;
    g.ns.front() = r;
    g.ns.back() = s;  // pin endpoints against rounding
    return g;
}

/// Bracketing of a net value between two adjacent hinges. Indices are
/// zero-based; w1 weights the left hinge, w2 the right, w1 + w2 = 1.
struct Located {
    std::size_t m1 = 0;
    std::size_t m2 = 0;
    double w1 = 0.0;
    double w2 = 0.0;
};

// A net value exactly on an interior hinge lands in the interval to its
// right; n == s is folded into the final interval.
inline Located locate(double n, const HingeGrid& grid) {
    if (n < grid.r || n > grid.s) throw OutOfRangeError(n, grid.r, grid.s);
    const std::size_t h = grid.hinge_count();
    double t = std::floor((n - grid.r) / grid.delta);
    std::size_t m1 = static_cast<std::size_t>(std::max(0.0, t));
    m1 = std::min(m1, h - 2);
    Located loc;
    loc.m1 = m1;
    loc.m2 = m1 + 1;
    loc.w2 = std::clamp((n - grid.ns[m1]) / grid.delta, 0.0, 1.0);
    loc.w1 = 1.0 - loc.w2;
    return loc;
}

/// Trainable activation: fixed hinge grid plus one height per hinge.
struct PiecewiseLinearActivation {
    HingeGrid grid;
    std::vector<double> a;  ///< trainable heights, a[m] at grid.ns[m]
};

inline PiecewiseLinearActivation init_from_reference(Reference kind, const HingeGrid& grid,
                                                     double leaky_slope = kDefaultLeakySlope) {
    PiecewiseLinearActivation pla;
    pla.grid = grid;
    pla.a.resize(grid.hinge_count());
    for (std::size_t m = 0; m < grid.hinge_count(); ++m)
        pla.a[m] = reference_value(kind, grid.ns[m], leaky_slope);
    return pla;
}

// Interpolated height; flat outside [r, s].
inline double evaluate(const PiecewiseLinearActivation& pla, double n) {
    if (n < pla.grid.r) return pla.a.front();
    if (n > pla.grid.s) return pla.a.back();
    const Located loc = locate(n, pla.grid);
    return loc.w1 * pla.a[loc.m1] + loc.w2 * pla.a[loc.m2];
}

// Interval slope; zero outside [r, s]. Shares locate()'s bucket convention,
// so an interior hinge reports its right interval.
inline double slope(const PiecewiseLinearActivation& pla, double n) {
    if (n < pla.grid.r || n > pla.grid.s) return 0.0;
    const Located loc = locate(n, pla.grid);
    return (pla.a[loc.m2] - pla.a[loc.m1]) / pla.grid.delta;
}

/// One PiecewiseLinearActivation per hidden unit; every unit has the same
/// hinge count, only ranges and heights differ.
struct ActivationBank {
    std::vector<PiecewiseLinearActivation> units;

    std::size_t size() const { return units.size(); }
    bool empty() const { return units.empty(); }
    std::size_t hinge_count() const { return units.empty() ? 0 : units.front().grid.hinge_count(); }
    const PiecewiseLinearActivation& unit(std::size_t k) const { return units[k]; }
    PiecewiseLinearActivation& unit(std::size_t k) { return units[k]; }
};

struct UnitRange {
    double r = 0.0;
    double s = 0.0;
};

/// Per-unit (min, max) of the net values over all patterns, widened by
/// `margin` of the span on each side. Column k of `nets` is hidden unit k.
inline std::vector<UnitRange> fit_ranges(const Matrix& nets, double margin = 0.05) {
    if (nets.rows() < 2) throw Error("fit_ranges requires at least two patterns");
    std::vector<UnitRange> out(nets.cols());
    for (std::size_t k = 0; k < nets.cols(); ++k) {
        double lo = nets(0, k), hi = nets(0, k);
        for (std::size_t p = 1; p < nets.rows(); ++p) {
            lo = std::min(lo, nets(p, k));
            hi = std::max(hi, nets(p, k));
        }
        if (!(hi > lo)) throw DegenerateUnitError(k);
        const double pad = margin * (hi - lo);
        out[k] = UnitRange{lo - pad, hi + pad};
    }
    return out;
}

inline ActivationBank make_bank(const std::vector<UnitRange>& ranges, std::size_t hinge_count,
                                Reference kind, double leaky_slope = kDefaultLeakySlope) {
    ActivationBank bank;
    bank.units.reserve(ranges.size());
    for (const UnitRange& ur : ranges)
        bank.units.push_back(init_from_reference(kind, init_hinges(ur.r, ur.s, hinge_count), leaky_slope));
    return bank;
}

}  // namespace adact
