#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace radocc::qsim {

using cplx = std::complex<double>;

/// Two-qubit state over |00>, |01>, |10>, |11>; basis index = 2*b0 + b1, so
/// qubit 0 is the left label.
struct StateVector {
    std::array<cplx, 4> amp{cplx{1.0, 0.0}, {}, {}, {}};

    static StateVector basis(int index);
    double norm_squared() const;
    std::array<double, 4> probabilities() const;
};

enum class GateKind { H, RY, RZ, CX, RZZ };

struct Gate {
    GateKind kind = GateKind::H;
    int q0 = 0;
    int q1 = 1;  // CX target / RZZ second qubit
    double angle = 0.0;

    static Gate h(int q) { return {GateKind::H, q, -1, 0.0}; }
    static Gate ry(int q, double a) { return {GateKind::RY, q, -1, a}; }
    static Gate rz(int q, double a) { return {GateKind::RZ, q, -1, a}; }
    static Gate cx(int control, int target) { return {GateKind::CX, control, target, 0.0}; }
    static Gate rzz(double a) { return {GateKind::RZZ, 0, 1, a}; }

    bool parameterized() const { return kind == GateKind::RY || kind == GateKind::RZ || kind == GateKind::RZZ; }
};

using CircuitSpec = std::vector<Gate>;

enum class Observable { II, ZI, IZ, ZZ };

std::string_view to_string(Observable obs);

void apply_gate(StateVector& state, const Gate& gate);
StateVector run(const CircuitSpec& circuit, StateVector state = {});

/// H(0), H(1), RZ(0, 2 x0), RZ(1, 2 x1), RZZ(2 (pi - x0)(pi - x1)).
/// Throws ConfigError for inputs outside [0, pi].
CircuitSpec zz_feature_map(double x0, double x1);

/// RY(0, t0), RY(1, t1), CX(0, 1), RY(0, t2), RY(1, t3).
CircuitSpec real_amplitudes(std::span<const double, 4> theta);

/// Feature map followed by the ansatz.
CircuitSpec hqnn_circuit(double x0, double x1, std::span<const double, 4> theta);

/// Gate positions inside hqnn_circuit.
inline constexpr int kRzGate0 = 2;
inline constexpr int kRzGate1 = 3;
inline constexpr int kRzzGate = 4;
inline constexpr std::array<int, 4> kAnsatzGates{5, 6, 8, 9};

double expectation(const StateVector& state, Observable obs);

/// Mean eigenvalue over `shots` basis measurements drawn with a counter RNG.
double sample_expectation(const StateVector& state, Observable obs, int shots,
                          std::uint64_t seed);

/// <ZI> and <IZ> estimated from the same set of shots.
std::array<double, 2> sample_zi_iz(const StateVector& state, int shots, std::uint64_t seed);

/// (E(angle + pi/2) - E(angle - pi/2)) / 2 for the parameterized gate at
/// `gate_index`, exact (analytic) expectation.
double param_shift_grad(const CircuitSpec& circuit, Observable obs, int gate_index);

// ---------------------------------------------------------------------------
// Layer-level evaluation used by the hybrid model.

enum class Mode { Analytic, Shots };

struct PqcForward {
    std::array<double, 2> z{};  // <ZI>, <IZ>
};

struct PqcBackward {
    std::array<double, 2> d_input{};  // dL/dx0, dL/dx1
    std::array<double, 4> d_theta{};
};

/// Runs the 2-input, 4-weight circuit and its parameter-shift gradients.
/// Counts circuit executions: one per forward, two per shifted gate in
/// backward (seven gate angles per sample).
class PqcLayer {
public:
    explicit PqcLayer(Mode mode = Mode::Analytic, int shots = 4096)
        : mode_(mode), shots_(shots) {}

    Mode mode() const { return mode_; }
    int shots() const { return shots_; }

    /// `seed` keys the shot stream; ignored in analytic mode.
    PqcForward forward(std::array<double, 2> x, std::span<const double, 4> theta,
                       std::uint64_t seed);

    /// Gradient of L given dL/d<ZI>, dL/d<IZ>. Input gradients compose the
    /// per-gate shifts through the RZ (2 x) and RZZ (2 (pi - x0)(pi - x1))
    /// angle maps.
    PqcBackward backward(std::array<double, 2> x, std::span<const double, 4> theta,
                         std::array<double, 2> upstream, std::uint64_t seed);

    std::uint64_t evaluations() const { return evaluations_; }
    void reset_evaluations() { evaluations_ = 0; }

private:
    std::array<double, 2> measure(const CircuitSpec& circuit, std::uint64_t seed);

    Mode mode_;
    int shots_;
    std::uint64_t evaluations_ = 0;
};

}  // namespace radocc::qsim
