#ifndef CCAGATE_PROTOCOL_HPP
#define CCAGATE_PROTOCOL_HPP

#include "ccagate/evolution.hpp"

#include <optional>
#include <set>

// The six-step controlled-U sequence.
//
//   1  microwave pi/4 pulse on the target qubit, phase -pi/2
//   2  optical pi/4 pulse on both qubits, phase +pi/2      (|1> -> |->)
//   3  dispersive interaction for tau = 2 pi / delta (or n tau)
//   4  repeat step 2                                       (|-> -> -|i>)
//   5  optical pi/2 pulse on both qubits, phase -lambda tau - pi/2
//   6  microwave pi/4 pulse on the target qubit, phase +pi/2
//
// Steps 1, 2, 4, 5, 6 are instantaneous resonant rotations; their finite
// durations enter only the time budget.  The result, for control qubit 1 and
// target qubit 2, is identity on |0x> and
//   e^{-i Theta} (cos Theta 1 - i sin Theta X)  on the target within |1x>,
// with Theta = lambda tau = g^2 pi / (4 delta^2).

namespace ccagate {

enum class SimMode { analytic, effective, full };

std::string to_string(SimMode mode);
SimMode sim_mode_from_string(std::string_view name);

enum class Transition { mw_01, opt_1i };

struct PulseSpec {
    Transition transition = Transition::mw_01;
    double rabi = 1.0;    // Rabi frequency
    double phase = 0.0;   // initial pulse phase
    double area = 0.0;    // rabi * duration, in (0, 2 pi]
    std::set<int> atoms;  // subset of {1, 2}

    double duration() const { return area / rabi; }
};

// Rotation on each addressed atom: lower level l and upper level u of the
// transition map as
//   l -> cos(theta) l - i e^{-i phase} sin(theta) u
//   u -> cos(theta) u - i e^{+i phase} sin(theta) l
// with theta = area; identity on the remaining level and all other factors.
Operator pulse_unitary(const PulseSpec& spec, const HilbertSpace& space);

struct ProtocolStep {
    int id = 0;
    std::string kind;  // "pulse" or "dispersive"
    std::optional<PulseSpec> pulse;
    double duration = 0.0;
    Ket post_state;
    double top_leak = 0.0;  // top-Fock-level population after (and, for step 3, during) the step
};

struct ProtocolTrace {
    SimMode mode = SimMode::analytic;
    std::vector<ProtocolStep> steps;
    std::vector<std::string> warnings;
    ConvergenceReport step3_convergence;  // zeros in analytic mode
    double total_duration() const;
};

struct GateResult {
    Matrix gate;               // 4x4 on |00>,|01>,|10>,|11>
    double theta_est = 0.0;    // recovered rotation angle
    double leakage = 0.0;      // max over columns of 1 - |column|^2
    double fidelity_vs_target = 0.0;
    bool fidelity_valid = false;  // false when the drive phase does not close
    std::vector<std::string> warnings;
};

// Precomputed step operators for one (params, mode, tau_cycles) combination;
// lets a gate extraction share the step-3 propagator across basis states.
class ProtocolEngine {
public:
    ProtocolEngine(SystemParams p, SimMode mode, int tau_cycles = 1);

    const HilbertSpace& space() const { return space_; }
    const SystemParams& params() const { return params_; }
    std::pair<Ket, ProtocolTrace> run(const Ket& initial) const;
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    SystemParams params_;
    SimMode mode_;
    int tau_cycles_;
    HilbertSpace space_;
    std::vector<PulseSpec> pulse_specs_;  // steps 1,2,4,5,6 in order
    std::vector<Operator> pulses_;
    Operator step3_;
    ConvergenceReport step3_report_;
    Operator step3_mid_;  // evolution to the displacement maximum, leak probe
    std::vector<std::string> warnings_;
};

// Run the six steps on `initial` (a computational basis state tensored with a
// field state for the chosen mode's space; any ket is propagated as given).
std::pair<Ket, ProtocolTrace> run_protocol(const SystemParams& p, SimMode mode, const Ket& initial,
                                           int tau_cycles = 1);

// Run all four computational inputs against the field reference state
// |fock_ref> in mode c (other modes vacuum); columns are field-reference
// overlaps, entanglement with the field shows up as leakage.
GateResult extract_gate(const SystemParams& p, SimMode mode, int fock_ref = 0,
                        int tau_cycles = 1);

// Ideal gate for rotation angle theta.
Matrix target_gate(double theta);

// Theta(g) = g^2 pi / (4 delta^2).
double theta_of_g(const SystemParams& p);

// pi / (2 omega_mw) + pi / omega_drive + 2 pi / delta.
double total_gate_time(const SystemParams& p);

// Discrete-interaction variant: (tau_n, Theta_n) = (2 pi n / delta, n Theta).
std::pair<double, double> discrete_u_times(const SystemParams& p, int n);

// Gate-leakage bound above which theta_est is considered meaningless.
inline constexpr double kGateLeakThreshold = 0.05;

}  // namespace ccagate

#endif
