#include "radocc/errors.hpp"
#include "radocc/qsim.hpp"
#include "radocc/rng.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace radocc;
using namespace radocc::qsim;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double fd_gate(CircuitSpec c, Observable obs, int gate, double h = 1e-6) {
    c[gate].angle += h;
    const double up = expectation(run(c), obs);
    c[gate].angle -= 2 * h;
    const double down = expectation(run(c), obs);
    return (up - down) / (2 * h);
}

}  // namespace

TEST_CASE("elementary gates") {
    const auto bell = run({Gate::h(0), Gate::cx(0, 1)});
    const auto p = bell.probabilities();
    CHECK(p[0] == Approx(0.5));
    CHECK(p[1] == Approx(0.0).margin(1e-15));
    CHECK(p[2] == Approx(0.0).margin(1e-15));
    CHECK(p[3] == Approx(0.5));

    const auto flipped = run({Gate::ry(0, kPi)});
    CHECK(flipped.probabilities()[2] == Approx(1.0));
    const auto flipped1 = run({Gate::ry(1, kPi)});
    CHECK(flipped1.probabilities()[1] == Approx(1.0));

    auto s = run({Gate::h(0), Gate::ry(1, 0.7)});
    const auto before = s.probabilities();
    apply_gate(s, Gate::rz(0, 1.3));
    apply_gate(s, Gate::rzz(0.4));
    const auto after = s.probabilities();
    for (int i = 0; i < 4; ++i) CHECK(after[i] == Approx(before[i]).margin(1e-15));
}

TEST_CASE("RZZ equals CX RZ CX") {
    const CircuitSpec prep{Gate::h(0), Gate::ry(1, 0.9), Gate::rz(0, 0.3), Gate::cx(1, 0)};
    for (double a : {0.0, 0.5, -2.1, 7.0}) {
        auto x = run(prep);
        auto y = x;
        apply_gate(x, Gate::rzz(a));
        for (const auto& g : {Gate::cx(0, 1), Gate::rz(1, a), Gate::cx(0, 1)}) apply_gate(y, g);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(x.amp[i] - y.amp[i]) < 1e-12);
    }
}

TEST_CASE("feature map alone leaves single-qubit Z expectations at zero") {
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double x0 = kPi * i / 19, x1 = kPi * j / 19;
            const auto s = run(zz_feature_map(x0, x1));
            REQUIRE(std::abs(expectation(s, Observable::ZI)) < 1e-12);
            REQUIRE(std::abs(expectation(s, Observable::IZ)) < 1e-12);
            REQUIRE(std::abs(s.norm_squared() - 1.0) < 1e-12);
        }
    }
    const auto fm = zz_feature_map(0.0, 0.0);
    CHECK(fm[kRzzGate].kind == GateKind::RZZ);
    CHECK(fm[kRzzGate].angle == Approx(2 * kPi * kPi));
    CHECK(fm[kRzGate0].angle == 0.0);
    CHECK(zz_feature_map(1.0, 0.5)[kRzGate1].angle == Approx(1.0));
    CHECK_THROWS_AS(zz_feature_map(-0.1, 0.0), ConfigError);
    CHECK_THROWS_AS(zz_feature_map(0.0, 3.2), ConfigError);
}

TEST_CASE("real amplitudes ansatz") {
    const std::array<double, 4> zero{};
    const auto id = run(real_amplitudes(zero));
    CHECK(id.probabilities()[0] == Approx(1.0));

    const std::array<double, 4> flip{kPi, 0, 0, 0};
    CHECK(run(real_amplitudes(flip)).probabilities()[3] == Approx(1.0));

    const std::array<double, 4> theta{0.3, -1.2, 2.0, 0.8};
    const auto s = run(real_amplitudes(theta));
    for (const auto& a : s.amp) CHECK(std::abs(a.imag()) < 1e-15);

    const auto full = hqnn_circuit(0.4, 2.2, theta);
    REQUIRE(full.size() == 10);
    for (std::size_t k = 0; k < kAnsatzGates.size(); ++k) {
        CHECK(full[static_cast<std::size_t>(kAnsatzGates[k])].kind == GateKind::RY);
        CHECK(full[static_cast<std::size_t>(kAnsatzGates[k])].angle == theta[k]);
    }
}

TEST_CASE("analytic expectations") {
    for (double t : {0.0, 0.4, 1.9, kPi}) {
        const auto s = run({Gate::ry(0, t)});
        CHECK(expectation(s, Observable::ZI) == Approx(std::cos(t)).margin(1e-15));
        CHECK(expectation(s, Observable::IZ) == Approx(1.0));
        CHECK(expectation(s, Observable::II) == Approx(1.0));
    }
    const auto bell = run({Gate::h(0), Gate::cx(0, 1)});
    CHECK(expectation(bell, Observable::ZZ) == Approx(1.0));
}

TEST_CASE("shot estimates") {
    const StateVector zero;
    CHECK(sample_expectation(zero, Observable::ZI, 100, 1) == 1.0);
    CHECK(sample_zi_iz(StateVector::basis(3), 50, 2) == std::array<double, 2>{-1.0, -1.0});

    const auto bell = run({Gate::h(0), Gate::cx(0, 1)});
    const auto e = sample_zi_iz(bell, 4096, 7);
    CHECK(std::abs(e[0]) < 0.078);
    CHECK(e[0] == e[1]);
    CHECK(sample_zi_iz(bell, 4096, 7) == e);
    CHECK(sample_zi_iz(bell, 4096, 8) != e);

    const auto s = run({Gate::ry(0, 1.0)});
    const double sigma = std::sin(1.0) / std::sqrt(1e6);
    CHECK(std::abs(sample_expectation(s, Observable::ZI, 1000000, 11) - std::cos(1.0)) < 3 * sigma);
}

TEST_CASE("parameter shift on a single rotation") {
    for (double t : {0.0, 0.7, 2.5}) {
        const CircuitSpec c{Gate::ry(0, t)};
        CHECK(param_shift_grad(c, Observable::ZI, 0) == Approx(-std::sin(t)).margin(1e-14));
    }
}

TEST_CASE("parameter shift agrees with finite differences on random circuits") {
    CounterRng rng(2024);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, 4> theta{};
        for (auto& t : theta) t = rng.uniform(-kPi, kPi);
        const auto c = hqnn_circuit(rng.uniform(0, kPi), rng.uniform(0, kPi), theta);
        for (int g = 0; g < static_cast<int>(c.size()); ++g) {
            if (!c[static_cast<std::size_t>(g)].parameterized()) continue;
            for (auto obs : {Observable::ZI, Observable::IZ}) {
                worst = std::max(worst, std::abs(param_shift_grad(c, obs, g) - fd_gate(c, obs, g)));
            }
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("layer input and weight gradients match finite differences") {
    PqcLayer layer;
    const std::array<double, 4> theta{0.7, -0.4, 1.1, 0.3};
    const std::array<double, 2> x{1.2, 0.5};
    const std::array<double, 2> up{0.8, -1.3};
    const auto g = layer.backward(x, theta, up, 0);
    auto loss = [&](std::array<double, 2> xi, std::array<double, 4> th) {
        const auto z = layer.forward(xi, th, 0).z;
        return up[0] * z[0] + up[1] * z[1];
    };
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
        auto a = x, b = x;
        a[i] += h;
        b[i] -= h;
        CHECK(g.d_input[i] == Approx((loss(a, theta) - loss(b, theta)) / (2 * h)).margin(1e-7));
    }
    for (int k = 0; k < 4; ++k) {
        auto a = theta, b = theta;
        a[k] += h;
        b[k] -= h;
        CHECK(g.d_theta[k] == Approx((loss(x, a) - loss(x, b)) / (2 * h)).margin(1e-7));
    }
}

TEST_CASE("layer evaluation count per sample") {
    PqcLayer layer;
    const std::array<double, 4> theta{0.1, 0.2, 0.3, 0.4};
    layer.forward({1.0, 2.0}, theta, 0);
    layer.backward({1.0, 2.0}, theta, {1.0, 1.0}, 0);
    CHECK(layer.evaluations() == 15);
    layer.reset_evaluations();
    CHECK(layer.evaluations() == 0);
}

TEST_CASE("shot-mode layer is reproducible per seed") {
    PqcLayer layer(Mode::Shots, 1024);
    const std::array<double, 4> theta{0.5, 1.0, -0.5, 2.0};
    const auto a = layer.forward({0.3, 2.9}, theta, 99).z;
    CHECK(layer.forward({0.3, 2.9}, theta, 99).z == a);
    PqcLayer exact;
    const auto e = exact.forward({0.3, 2.9}, theta, 0).z;
    for (int i = 0; i < 2; ++i) CHECK(std::abs(a[i] - e[i]) < 5.0 / std::sqrt(1024.0));
}
