#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "adact/burden.hpp"
#include "adact/ols.hpp"
#include "oracles.hpp"

using namespace adact;

namespace {

BurdenInput dims(std::int64_t n, std::int64_t nh, std::int64_t m, std::int64_t nv,
                 std::int64_t hinges) {
    BurdenInput in;
    in.n_in = n;
    in.n_hidden = nh;
    in.n_out = m;
    in.n_patterns = nv;
    in.n_hinges = hinges;
    return in;
}

// The closed forms evaluated independently in floating point.
double ols_formula(const BurdenInput& in) {
    const double nu = static_cast<double>(in.basis_count());
    const double m = static_cast<double>(in.n_out);
    return nu * (nu + 1.0) * (m + nu * (2.0 * nu + 1.0) / 6.0 + 1.5);
}

double molf_formula(const BurdenInput& in) {
    const double nv = static_cast<double>(in.n_patterns);
    const double nh = static_cast<double>(in.n_hidden);
    const double n = static_cast<double>(in.n_in);
    const double m = static_cast<double>(in.n_out);
    return ols_formula(in) + nv * nh * (2.0 * m + n + 2.0 + m * (nh + 1.0) / 2.0);
}

}  // namespace

TEST_CASE("burden reproduces the worked example", "[burden]") {
    const BurdenInput in = dims(4, 3, 2, 10, 7);
    REQUIRE(in.basis_count() == 8);
    REQUIRE(burden(BurdenKind::Ols, in) == 1884);
    REQUIRE(burden(BurdenKind::Molf, in) == 2304);
    REQUIRE(burden(BurdenKind::AdAct, in) == 2325);
}

TEST_CASE("burden matches the floating-point formula oracle", "[burden]") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const BurdenInput in = dims(1 + rng() % 20, 1 + rng() % 20, 1 + rng() % 8,
                                    1 + rng() % 500, 1 + rng() % 30);
        REQUIRE(static_cast<double>(burden(BurdenKind::Ols, in)) ==
                Catch::Approx(ols_formula(in)).margin(0.51));
        REQUIRE(static_cast<double>(burden(BurdenKind::Molf, in)) ==
                Catch::Approx(molf_formula(in)).margin(0.51));
    }
}

TEST_CASE("adact burden adds one multiply per hinge per hidden unit", "[burden]") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const BurdenInput in = dims(1 + rng() % 30, 1 + rng() % 30, 1 + rng() % 10,
                                    1 + rng() % 1000, 1 + rng() % 40);
        REQUIRE(burden(BurdenKind::AdAct, in) - burden(BurdenKind::Molf, in) ==
                in.n_hidden * in.n_hinges);
    }
}

TEST_CASE("cg and scg share a count and lm adds its extra term", "[burden]") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const BurdenInput in = dims(1 + rng() % 10, 1 + rng() % 10, 1 + rng() % 5,
                                    1 + rng() % 100, 1 + rng() % 20);
        REQUIRE(burden(BurdenKind::Cg, in) == burden(BurdenKind::Scg, in));
        REQUIRE(burden(BurdenKind::Lm, in) - burden(BurdenKind::Cg, in) ==
                2 * in.n_hidden * (in.n_in + 1));
        REQUIRE(burden(BurdenKind::Lm, in) >= burden(BurdenKind::Cg, in));
    }
}

TEST_CASE("burden is monotone in every dimension", "[burden]") {
    std::mt19937 rng(19);
    const BurdenKind kinds[] = {BurdenKind::Lm, BurdenKind::Cg, BurdenKind::Scg,
                                BurdenKind::Molf, BurdenKind::AdAct, BurdenKind::Ols};
    for (int trial = 0; trial < 40; ++trial) {
        const BurdenInput base = dims(1 + rng() % 8, 1 + rng() % 8, 1 + rng() % 4,
                                      1 + rng() % 60, 1 + rng() % 12);
        for (BurdenKind kind : kinds) {
            const std::int64_t v0 = burden(kind, base);
            for (int field = 0; field < 5; ++field) {
                BurdenInput bumped = base;
                (field == 0   ? bumped.n_in
                 : field == 1 ? bumped.n_hidden
                 : field == 2 ? bumped.n_out
                 : field == 3 ? bumped.n_patterns
                              : bumped.n_hinges) += 1;
                REQUIRE(burden(kind, bumped) >= v0);
            }
        }
    }
}

TEST_CASE("burden rejects nonpositive dimensions", "[burden]") {
    REQUIRE_THROWS_AS(burden(BurdenKind::Molf, dims(0, 1, 1, 1, 1)), Error);
    REQUIRE_THROWS_AS(burden(BurdenKind::Molf, dims(1, 1, 1, -2, 1)), Error);
}

TEST_CASE("runtime multiply counter tracks the ols model within 2x", "[burden]") {
    // comparison regime: the closed form's quartic orthonormalization term
    // overtakes any single solve once N_u grows or M falls below ~2 N_u
    std::mt19937 rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t nu = 3 + rng() % 4;
        const std::size_t m = 2 * nu + rng() % (2 * nu + 1);
        const Matrix r = oracles::random_spd(nu, rng, 1.0, 3.0);
        const Matrix c = oracles::random_matrix(nu, m, rng);
        MultiplyCounter counter;
        (void)solve_via_ols(r, c, &counter);

        BurdenInput in;
        in.n_in = 1;
        in.n_hidden = static_cast<std::int64_t>(nu) - 2;
        in.n_out = static_cast<std::int64_t>(m);
        in.n_patterns = 1;
        in.n_hinges = 1;
        REQUIRE(in.basis_count() == static_cast<std::int64_t>(nu));

        const double model = static_cast<double>(burden(BurdenKind::Ols, in));
        const double actual = static_cast<double>(counter.count);
        REQUIRE(model / actual >= 0.5);
        REQUIRE(model / actual <= 2.0);
    }
}
