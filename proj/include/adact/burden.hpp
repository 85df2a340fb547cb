#pragma once

#include <cstdint>
#include <string>

#include "errors.hpp"

namespace adact {

/// Network and dataset dimensions the multiply-count model depends on.
struct BurdenInput {
    std::int64_t n_in = 0;      ///< N
    std::int64_t n_hidden = 0;  ///< N_h
    std::int64_t n_out = 0;     ///< M
    std::int64_t n_patterns = 0;  ///< N_v
    std::int64_t n_hinges = 0;  ///< hinge count per hidden unit

    std::int64_t basis_count() const { return n_in + n_hidden + 1; }  ///< N_u
    std::int64_t weight_count() const {                               ///< N_w
        return n_out * basis_count() + (n_in + 1) * n_hidden;
    }

    void validate() const {
        if (n_in < 1 || n_hidden < 1 || n_out < 1 || n_patterns < 1 || n_hinges < 1)
            throw Error("burden dimensions must be positive");
    }
};

enum class BurdenKind { Lm, Cg, Scg, Molf, AdAct, Ols };

inline const char* burden_kind_name(BurdenKind k) {
    switch (k) {
        case BurdenKind::Lm: return "lm";
        case BurdenKind::Cg: return "cg";
        case BurdenKind::Scg: return "scg";
        case BurdenKind::Molf: return "molf";
        case BurdenKind::AdAct: return "adact";
        case BurdenKind::Ols: return "ols";
    }
    return "?";
}

namespace detail {

// Exact rational accumulator over a fixed denominator of 6, rounded to the
// nearest integer at the very end so counts are bit-stable across platforms.
struct Sixths {
    __int128 num = 0;  // value is num / 6

    void add_int(__int128 v) { num += 6 * v; }
    void add_sixths(__int128 v) { num += v; }
    void add_halves(__int128 v) { num += 3 * v; }

    std::int64_t rounded() const {
        __int128 n = num;
        const bool neg = n < 0;
        if (neg) n = -n;
        __int128 q = n / 6, r = n % 6;
        if (2 * r >= 6) ++q;  // half away from zero
        return static_cast<std::int64_t>(neg ? -q : q);
    }
};

inline std::int64_t ols_multiplies(const BurdenInput& in) {
    const __int128 nu = in.basis_count();
    const __int128 m = in.n_out;
    // N_u (N_u + 1) [M + N_u (2 N_u + 1)/6 + 3/2]
    Sixths acc;
    acc.add_int(nu * (nu + 1) * m);
    acc.add_sixths(nu * (nu + 1) * nu * (2 * nu + 1));
    acc.add_halves(3 * nu * (nu + 1));
    return acc.rounded();
}

inline std::int64_t molf_multiplies(const BurdenInput& in) {
    const __int128 nv = in.n_patterns, nh = in.n_hidden, n = in.n_in, m = in.n_out;
    // M_ols + N_v N_h [2M + N + 2 + M (N_h + 1)/2]
    Sixths acc;
    acc.add_int(ols_multiplies(in));
    acc.add_int(nv * nh * (2 * m + n + 2));
    acc.add_halves(nv * nh * m * (nh + 1));
    return acc.rounded();
}

inline std::int64_t cg_core(const BurdenInput& in, bool with_lm_term) {
    const __int128 n = in.n_in, nh = in.n_hidden, m = in.n_out;
    const __int128 nu = in.basis_count(), nw = in.weight_count();
    __int128 total = m * nu;
    if (with_lm_term) total += 2 * nh * (n + 1);
    total += m * (n + 6 * nh + 4);
    total += m * nu * (nu + 3 * nh * (n + 1));
    total += 4 * nh * nh * nh * nh * (n + 1) * (n + 1);
    total += nw * nw * nw + nw * nw;
    return static_cast<std::int64_t>(total);
}

}  // namespace detail

/// Closed-form multiply count per training iteration.
inline std::int64_t burden(BurdenKind kind, const BurdenInput& in) {
    in.validate();
    switch (kind) {
        case BurdenKind::Ols: return detail::ols_multiplies(in);
        case BurdenKind::Molf: return detail::molf_multiplies(in);
        case BurdenKind::AdAct: return detail::molf_multiplies(in) + in.n_hidden * in.n_hinges;
        case BurdenKind::Cg:
        case BurdenKind::Scg: return detail::cg_core(in, false);
        case BurdenKind::Lm: return detail::cg_core(in, true);
    }
    throw Error("unknown burden kind");
}

}  // namespace adact
