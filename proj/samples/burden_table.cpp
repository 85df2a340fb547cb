// Prints the per-iteration multiply counts for every algorithm over a small
// sweep of hidden-unit counts.

#include <cstdio>

#include "adact/burden.hpp"

int main() {
    std::printf("%-4s %12s %12s %12s %12s %12s\n", "N_h", "lm", "cg", "molf", "adact", "ols");
    for (std::int64_t nh : {1, 5, 10, 20, 50}) {
        adact::BurdenInput in;
        in.n_in = 8;
        in.n_hidden = nh;
        in.n_out = 3;
        in.n_patterns = 1000;
        in.n_hinges = 20;
        std::printf("%-4lld %12lld %12lld %12lld %12lld %12lld\n", (long long)nh,
                    (long long)adact::burden(adact::BurdenKind::Lm, in),
                    (long long)adact::burden(adact::BurdenKind::Cg, in),
                    (long long)adact::burden(adact::BurdenKind::Molf, in),
                    (long long)adact::burden(adact::BurdenKind::AdAct, in),
                    (long long)adact::burden(adact::BurdenKind::Ols, in));
    }
    return 0;
}
