#include "radocc/qsim.hpp"

#include "radocc/errors.hpp"
#include "radocc/rng.hpp"

#include <cmath>
#include <numbers>

namespace radocc::qsim {

namespace {

constexpr double kPi = std::numbers::pi;

// Amplitude index of (b0, b1).
constexpr int idx(int b0, int b1) { return 2 * b0 + b1; }

int bit_of(int index, int qubit) { return qubit == 0 ? (index >> 1) & 1 : index & 1; }

void apply_single(StateVector& s, int q, const std::array<cplx, 4>& m) {
    for (int other = 0; other < 2; ++other) {
        const int i0 = q == 0 ? idx(0, other) : idx(other, 0);
        const int i1 = q == 0 ? idx(1, other) : idx(other, 1);
        const cplx a = s.amp[i0];
        const cplx b = s.amp[i1];
        s.amp[i0] = m[0] * a + m[1] * b;
        s.amp[i1] = m[2] * a + m[3] * b;
    }
}

double eigenvalue(Observable obs, int index) {
    const int z0 = bit_of(index, 0) ? -1 : 1;
    const int z1 = bit_of(index, 1) ? -1 : 1;
    switch (obs) {
        case Observable::II: return 1.0;
        case Observable::ZI: return z0;
        case Observable::IZ: return z1;
        case Observable::ZZ: return z0 * z1;
    }
    return 0.0;
}

// Thresholds on the 64-bit draw for each basis outcome.
std::array<int, 4> sample_counts(const StateVector& state, int shots, std::uint64_t seed) {
    if (shots < 1) throw ConfigError("shots must be at least 1");
    const auto p = state.probabilities();
    const double total = p[0] + p[1] + p[2] + p[3];
    std::array<double, 3> cum{};
    double acc = 0.0;
    for (int j = 0; j < 3; ++j) {
        acc += p[j] / total;
        cum[j] = acc;
    }
    std::array<std::uint64_t, 3> edge{};
    for (int j = 0; j < 3; ++j) {
        // 2^64 * cum, saturating at the top.
        const double scaled = std::ldexp(cum[j], 64);
        edge[j] = scaled >= 0x1.0p64 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(scaled);
    }
    std::array<int, 4> counts{};
    CounterRng rng(seed);
    for (int s = 0; s < shots; ++s) {
        const std::uint64_t u = rng.next_u64();
        const int k = u < edge[0] ? 0 : u < edge[1] ? 1 : u < edge[2] ? 2 : 3;
        ++counts[k];
    }
    return counts;
}

}  // namespace

StateVector StateVector::basis(int index) {
    StateVector s;
    s.amp = {};
    s.amp.at(static_cast<std::size_t>(index)) = 1.0;
    return s;
}

double StateVector::norm_squared() const {
    return std::norm(amp[0]) + std::norm(amp[1]) + std::norm(amp[2]) + std::norm(amp[3]);
}

std::array<double, 4> StateVector::probabilities() const {
    return {std::norm(amp[0]), std::norm(amp[1]), std::norm(amp[2]), std::norm(amp[3])};
}

std::string_view to_string(Observable obs) {
    switch (obs) {
        case Observable::II: return "II";
        case Observable::ZI: return "ZI";
        case Observable::IZ: return "IZ";
        case Observable::ZZ: return "ZZ";
    }
    return "?";
}

void apply_gate(StateVector& s, const Gate& g) {
    switch (g.kind) {
        case GateKind::H: {
            const double r = 1.0 / std::numbers::sqrt2;
            apply_single(s, g.q0, {r, r, r, -r});
            break;
        }
        case GateKind::RY: {
            const double c = std::cos(g.angle / 2);
            const double sn = std::sin(g.angle / 2);
            apply_single(s, g.q0, {c, -sn, sn, c});
            break;
        }
        case GateKind::RZ: {
            const cplx lo = std::polar(1.0, -g.angle / 2);
            const cplx hi = std::polar(1.0, g.angle / 2);
            apply_single(s, g.q0, {lo, 0.0, 0.0, hi});
            break;
        }
        case GateKind::CX: {
            if (g.q0 == g.q1) throw ConfigError("CX control and target must differ");
            for (int i = 0; i < 4; ++i) {
                if (bit_of(i, g.q0) == 1 && bit_of(i, g.q1) == 0) {
                    const int j = i | (g.q1 == 0 ? 2 : 1);
                    std::swap(s.amp[i], s.amp[j]);
                }
            }
            break;
        }
        case GateKind::RZZ: {
            const cplx same = std::polar(1.0, -g.angle / 2);
            const cplx diff = std::polar(1.0, g.angle / 2);
            s.amp[0] *= same;
            s.amp[1] *= diff;
            s.amp[2] *= diff;
            s.amp[3] *= same;
            break;
        }
    }
}

StateVector run(const CircuitSpec& circuit, StateVector state) {
    for (const Gate& g : circuit) apply_gate(state, g);
    return state;
}

CircuitSpec zz_feature_map(double x0, double x1) {
    for (double x : {x0, x1}) {
        if (!(x >= 0.0 && x <= kPi)) {
            throw ConfigError("feature-map input " + std::to_string(x) + " outside [0, pi]");
        }
    }
    return {Gate::h(0), Gate::h(1), Gate::rz(0, 2 * x0), Gate::rz(1, 2 * x1),
            Gate::rzz(2 * (kPi - x0) * (kPi - x1))};
}

CircuitSpec real_amplitudes(std::span<const double, 4> t) {
    return {Gate::ry(0, t[0]), Gate::ry(1, t[1]), Gate::cx(0, 1), Gate::ry(0, t[2]),
            Gate::ry(1, t[3])};
}

CircuitSpec hqnn_circuit(double x0, double x1, std::span<const double, 4> theta) {
    CircuitSpec c = zz_feature_map(x0, x1);
    const CircuitSpec a = real_amplitudes(theta);
    c.insert(c.end(), a.begin(), a.end());
    return c;
}

double expectation(const StateVector& state, Observable obs) {
    double e = 0.0;
    for (int i = 0; i < 4; ++i) e += eigenvalue(obs, i) * std::norm(state.amp[i]);
    return e;
}

double sample_expectation(const StateVector& state, Observable obs, int shots,
                          std::uint64_t seed) {
    const auto counts = sample_counts(state, shots, seed);
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) sum += eigenvalue(obs, i) * counts[i];
    return sum / shots;
}

std::array<double, 2> sample_zi_iz(const StateVector& state, int shots, std::uint64_t seed) {
    const auto c = sample_counts(state, shots, seed);
    return {static_cast<double>(c[0] + c[1] - c[2] - c[3]) / shots,
            static_cast<double>(c[0] - c[1] + c[2] - c[3]) / shots};
}

double param_shift_grad(const CircuitSpec& circuit, Observable obs, int gate_index) {
    const Gate& g = circuit.at(static_cast<std::size_t>(gate_index));
    if (!g.parameterized()) throw ConfigError("gate has no angle to shift");
    CircuitSpec shifted = circuit;
    shifted[gate_index].angle = g.angle + kPi / 2;
    const double plus = expectation(run(shifted), obs);
    shifted[gate_index].angle = g.angle - kPi / 2;
    const double minus = expectation(run(shifted), obs);
    return (plus - minus) / 2;
}

std::array<double, 2> PqcLayer::measure(const CircuitSpec& circuit, std::uint64_t seed) {
    ++evaluations_;
    const StateVector s = run(circuit);
    if (mode_ == Mode::Analytic) {
        return {expectation(s, Observable::ZI), expectation(s, Observable::IZ)};
    }
    return sample_zi_iz(s, shots_, seed);
}

PqcForward PqcLayer::forward(std::array<double, 2> x, std::span<const double, 4> theta,
                             std::uint64_t seed) {
    return {measure(hqnn_circuit(x[0], x[1], theta), seed)};
}

PqcBackward PqcLayer::backward(std::array<double, 2> x, std::span<const double, 4> theta,
                               std::array<double, 2> upstream, std::uint64_t seed) {
    const CircuitSpec base = hqnn_circuit(x[0], x[1], theta);
    int shift = 0;
    // dL/d(angle of gate) for one parameterized gate.
    auto gate_grad = [&](int gate) {
        CircuitSpec c = base;
        c[gate].angle = base[gate].angle + kPi / 2;
        const auto plus = measure(c, mix_seed(seed, static_cast<std::uint64_t>(++shift)));
        c[gate].angle = base[gate].angle - kPi / 2;
        const auto minus = measure(c, mix_seed(seed, static_cast<std::uint64_t>(++shift)));
        return upstream[0] * (plus[0] - minus[0]) / 2 + upstream[1] * (plus[1] - minus[1]) / 2;
    };

    PqcBackward out;
    for (int k = 0; k < 4; ++k) out.d_theta[k] = gate_grad(kAnsatzGates[k]);
    const double g_rz0 = gate_grad(kRzGate0);
    const double g_rz1 = gate_grad(kRzGate1);
    const double g_rzz = gate_grad(kRzzGate);
    out.d_input[0] = 2.0 * g_rz0 - 2.0 * (kPi - x[1]) * g_rzz;
    out.d_input[1] = 2.0 * g_rz1 - 2.0 * (kPi - x[0]) * g_rzz;
    return out;
}

}  // namespace radocc::qsim
