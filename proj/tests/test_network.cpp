#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "adact/network.hpp"
#include "adact/trainers.hpp"
#include "oracles.hpp"

using namespace adact;

namespace {

// Fully hand-built 1-1-1 network with an identity activation on [-10, 10].
MlpNetwork tiny_net(double w, double t, double woh, double woi, double to) {
    MlpNetwork net;
    net.n_in = net.n_hidden = net.n_out = 1;
    net.W = Matrix(1, 2);
    net.W(0, 0) = w;
    net.W(0, 1) = t;
    net.W_oh = Matrix(1, 1);
    net.W_oh(0, 0) = woh;
    net.W_oi = Matrix(1, 2);
    net.W_oi(0, 0) = woi;
    net.W_oi(0, 1) = to;
    net.bank.units.push_back(
        init_from_reference(Reference::Identity, init_hinges(-10.0, 10.0, 21)));
    return net;
}

}  // namespace

TEST_CASE("init_network is deterministic and shaped correctly", "[network]") {
    const MlpNetwork a = init_network(3, 4, 2, 99, 0.5);
    const MlpNetwork b = init_network(3, 4, 2, 99, 0.5);
    REQUIRE(a.W == b.W);
    REQUIRE(a.W.rows() == 4);
    REQUIRE(a.W.cols() == 4);
    REQUIRE(a.basis_count() == 8);

    const MlpNetwork zero = init_network(2, 2, 1, 7, 0.0);
    for (double v : zero.W.values()) REQUIRE(v == 0.0);

    const MlpNetwork one = init_network(1, 1, 1, 7, 1.0);
    REQUIRE(one.W.rows() == 1);
    REQUIRE(one.W.cols() == 2);
    for (double v : one.W_oh.values()) REQUIRE(v == 0.0);
    for (double v : one.W_oi.values()) REQUIRE(v == 0.0);

    const MlpNetwork c = init_network(3, 4, 2, 100, 0.5);
    REQUIRE(!(a.W == c.W));
}

TEST_CASE("forward matches a scalar hand computation", "[network]") {
    const MlpNetwork net = tiny_net(2.0, -0.5, 3.0, 0.25, 1.0);
    Matrix x(1, 1);
    x(0, 0) = 1.5;
    const ForwardCache cache = forward(net, x);
    const double n1 = 2.0 * 1.5 - 0.5;  // 2.5
    REQUIRE(cache.nets(0, 0) == Catch::Approx(n1).margin(1e-15));
    REQUIRE(cache.acts(0, 0) == Catch::Approx(n1).margin(1e-12));
    REQUIRE(cache.xa(0, 0) == 1.5);
    REQUIRE(cache.xa(0, 2) == 1.0);
    const double y = 0.25 * 1.5 + 1.0 + 3.0 * n1;
    REQUIRE(cache.Y(0, 0) == Catch::Approx(y).margin(1e-12));
}

TEST_CASE("forward with zero input weights reduces to the output layer", "[network]") {
    MlpNetwork net = tiny_net(0.0, 0.0, 0.0, 2.0, -1.0);
    Matrix x(3, 1);
    x(0, 0) = -1.0;
    x(1, 0) = 0.0;
    x(2, 0) = 2.0;
    const ForwardCache cache = forward(net, x);
    for (std::size_t p = 0; p < 3; ++p) {
        REQUIRE(cache.acts(p, 0) == 0.0);  // identity PLA at net 0
        REQUIRE(cache.Y(p, 0) == Catch::Approx(2.0 * x(p, 0) - 1.0).margin(1e-15));
    }
}

TEST_CASE("outputs are linear in the output weights", "[network]") {
    MlpNetwork net = tiny_net(1.0, 0.3, 2.0, -0.7, 0.4);
    Matrix x(4, 1);
    for (std::size_t p = 0; p < 4; ++p) x(p, 0) = 0.5 * static_cast<double>(p) - 1.0;
    const ForwardCache base = forward(net, x);

    const double alpha = 3.0;
    for (double& v : net.W_oh.values()) v *= alpha;
    for (double& v : net.W_oi.values()) v *= alpha;
    const Matrix scaled = outputs_from_cache(net, base);
    for (std::size_t p = 0; p < 4; ++p)
        REQUIRE(scaled(p, 0) == Catch::Approx(alpha * base.Y(p, 0)).margin(1e-12));
}

TEST_CASE("forward rejects non-finite inputs with the pattern index", "[network]") {
    const MlpNetwork net = tiny_net(1.0, 0.0, 1.0, 0.0, 0.0);
    Matrix x(3, 1);
    x(0, 0) = 1.0;
    x(1, 0) = std::numeric_limits<double>::quiet_NaN();
    x(2, 0) = 2.0;
    try {
        forward(net, x);
        FAIL("expected InvalidInputError");
    } catch (const InvalidInputError& e) {
        REQUIRE(e.pattern == 1);
    }
}

TEST_CASE("build_correlations matches the outer-product oracle", "[network]") {
    ForwardCache cache;
    cache.xa = Matrix(1, 2);
    cache.xa(0, 0) = 1.0;
    cache.xa(0, 1) = 2.0;
    Matrix t(1, 1);
    t(0, 0) = 3.0;
    const CorrelationSystem sys = build_correlations(cache, t);
    REQUIRE(sys.R(0, 0) == 1.0);
    REQUIRE(sys.R(0, 1) == 2.0);
    REQUIRE(sys.R(1, 0) == 2.0);
    REQUIRE(sys.R(1, 1) == 4.0);
    REQUIRE(sys.C(0, 0) == 3.0);
    REQUIRE(sys.C(1, 0) == 6.0);
}

TEST_CASE("orthonormal patterns give a scaled identity R", "[network]") {
    ForwardCache cache;
    cache.xa = Matrix(2, 2);
    cache.xa(0, 0) = 1.0;
    cache.xa(1, 1) = 1.0;
    Matrix t(2, 1);  // zero targets
    const CorrelationSystem sys = build_correlations(cache, t);
    REQUIRE(sys.R(0, 0) == 0.5);
    REQUIRE(sys.R(1, 1) == 0.5);
    REQUIRE(sys.R(0, 1) == 0.0);
    for (double v : sys.C.values()) REQUIRE(v == 0.0);
}

TEST_CASE("R is symmetric on random data", "[network]") {
    std::mt19937 rng(13);
    ForwardCache cache;
    cache.xa = oracles::random_matrix(50, 6, rng);
    const Matrix t = oracles::random_matrix(50, 3, rng);
    const CorrelationSystem sys = build_correlations(cache, t);
    for (std::size_t q = 0; q < 6; ++q)
        for (std::size_t l = 0; l < 6; ++l)
            REQUIRE(std::abs(sys.R(q, l) - sys.R(l, q)) <= 1e-12);
}

TEST_CASE("mse and pe cover the documented cases", "[network]") {
    Matrix y(2, 2), t(2, 2);
    y(0, 0) = 1.0;
    y(1, 1) = 1.0;
    t = y;
    REQUIRE(mse(y, t) == 0.0);
    REQUIRE(pe(y, t) == 0.0);

    Matrix y1(1, 1), t1(1, 1);
    t1(0, 0) = 1.0;
    REQUIRE(mse(y1, t1) == 1.0);

    // one argmax mismatch out of two patterns
    Matrix y2(2, 2), t2(2, 2);
    y2(0, 0) = 1.0;   // predicted class 0
    t2(0, 0) = 1.0;   // true class 0
    y2(1, 0) = 1.0;   // predicted class 0
    t2(1, 1) = 1.0;   // true class 1
    REQUIRE(pe(y2, t2) == 50.0);

    Matrix empty;
    REQUIRE_THROWS_AS(mse(empty, empty), EmptyDatasetError);
    REQUIRE_THROWS_AS(pe(empty, empty), EmptyDatasetError);
}

TEST_CASE("forward is deterministic", "[network]") {
    std::mt19937 rng(21);
    MlpNetwork net = init_network(3, 2, 2, 5, 0.8);
    const Matrix x = oracles::random_matrix(40, 3, rng);
    TrainConfig cfg;
    cfg.hidden_units = 2;
    cfg.hinges = 6;
    prime_network(net, x, cfg);
    const ForwardCache a = forward(net, x);
    const ForwardCache b = forward(net, x);
    REQUIRE(a.Y == b.Y);
    REQUIRE(a.xa == b.xa);
}

TEST_CASE("residual output-weight gradient vanishes after an exact OWO solve", "[network]") {
    // finite differences of the error with respect to every output weight
    std::mt19937 rng(31);
    MlpNetwork net = init_network(2, 2, 2, 77, 0.6);
    const Matrix x = oracles::random_matrix(15, 2, rng);
    const Matrix t = oracles::random_matrix(15, 2, rng);
    TrainConfig cfg;
    cfg.hidden_units = 2;
    cfg.hinges = 5;
    prime_network(net, x, cfg);
    ForwardCache cache = forward(net, x);
    owo_step(net, cache, t);

    const double h = 1e-4;
    auto error_at = [&]() { return mse(outputs_from_cache(net, cache), t); };
    for (auto* block : {&net.W_oh, &net.W_oi}) {
        for (double& w : block->values()) {
            const double saved = w;
            w = saved + h;
            const double ep = error_at();
            w = saved - h;
            const double em = error_at();
            w = saved;
            REQUIRE(std::abs((ep - em) / (2.0 * h)) <= 1e-8);
        }
    }
}
