#include "ccagate/protocol.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace ccagate {

std::string to_string(SimMode mode) {
    switch (mode) {
        case SimMode::analytic: return "analytic";
        case SimMode::effective: return "effective";
        case SimMode::full: return "full";
    }
    return "?";
}

SimMode sim_mode_from_string(std::string_view name) {
    if (name == "analytic") return SimMode::analytic;
    if (name == "effective") return SimMode::effective;
    if (name == "full") return SimMode::full;
    throw SimulationError("unknown mode '" + std::string(name) + "'");
}

Operator pulse_unitary(const PulseSpec& spec, const HilbertSpace& space) {
    if (!(spec.area > 0.0) || spec.area > 2.0 * std::numbers::pi + 1e-12)
        throw SimulationError("pulse_unitary: area must be in (0, 2 pi]");
    const int lower = spec.transition == Transition::mw_01 ? 0 : 1;
    const int upper = spec.transition == Transition::mw_01 ? 1 : 2;
    const double theta = spec.area;
    Matrix block = Matrix::Identity(3, 3);
    block(lower, lower) = std::cos(theta);
    block(upper, upper) = std::cos(theta);
    block(upper, lower) = -kI * std::exp(-kI * spec.phase) * std::sin(theta);
    block(lower, upper) = -kI * std::exp(kI * spec.phase) * std::sin(theta);

    Operator u = Operator::identity(space);
    for (int atom : spec.atoms) {
        const std::string label = atom == 1 ? "atom1" : "atom2";
        u = embed(Operator(HilbertSpace({{label, 3}}), block), space, label) * u;
    }
    return u;
}

double ProtocolTrace::total_duration() const {
    double sum = 0.0;
    for (const auto& s : steps) sum += s.duration;
    return sum;
}

namespace {

constexpr double kPi = std::numbers::pi;

double ket_top_leak(const Ket& k) {
    double leak = 0.0;
    const HilbertSpace& space = k.space;
    for (int i = 0; i < space.num_factors(); ++i) {
        const auto& f = space.factors()[i];
        if (f.label == "atom1" || f.label == "atom2") continue;
        double pop = 0.0;
        for (int idx = 0; idx < space.total_dim(); ++idx)
            if (space.level_of(idx, i) == f.dim - 1) pop += std::norm(k.amp(idx));
        leak = std::max(leak, pop);
    }
    return leak;
}

}  // namespace

ProtocolEngine::ProtocolEngine(SystemParams p, SimMode mode, int tau_cycles)
    : params_(std::move(p)), mode_(mode), tau_cycles_(tau_cycles) {
    if (tau_cycles_ < 1) throw SimulationError("ProtocolEngine: tau_cycles must be >= 1");
    space_ = mode_ == SimMode::full ? full_space(params_) : effective_space(params_);

    const RegimeFlags regime = params_.regime();
    if (!regime.integer_drive_ratio)
        warnings_.push_back("omega_drive/delta is not an integer: the step-3 drive phase does not "
                            "close and the final truth table does not apply");
    if (mode_ == SimMode::full) {
        if (!regime.strong_fiber)
            warnings_.push_back("regime violation: nu < 10 g (fiber coupling not strong)");
        if (!regime.strong_drive)
            warnings_.push_back("regime violation: omega_drive < 10 max(g, delta)");
    }

    const double theta3 = tau_cycles_ * params_.lambda() * params_.tau();
    pulse_specs_ = {
        {Transition::mw_01, params_.omega_mw, -kPi / 2, kPi / 4, {2}},
        {Transition::opt_1i, params_.omega_drive, kPi / 2, kPi / 4, {1, 2}},
        {Transition::opt_1i, params_.omega_drive, kPi / 2, kPi / 4, {1, 2}},
        {Transition::opt_1i, params_.omega_drive, -theta3 - kPi / 2, kPi / 2, {1, 2}},
        {Transition::mw_01, params_.omega_mw, kPi / 2, kPi / 4, {2}},
    };
    for (const PulseSpec& spec : pulse_specs_) pulses_.push_back(pulse_unitary(spec, space_));

    const double tau = params_.tau();
    const double t3 = tau_cycles_ * tau;
    const double t_mid = kPi / params_.delta;  // displacement maximum
    switch (mode_) {
        case SimMode::analytic: {
            // closed loop: repeated single-loop operators
            Operator loop = u_total(params_, space_);
            Operator u = loop;
            for (int n = 1; n < tau_cycles_; ++n) u = loop * u;
            step3_ = u;
            step3_mid_ = u_prime_closed_ab(ab_coefficients(params_, t_mid), space_);
            break;
        }
        case SimMode::effective: {
            // td_steps (when set) seeds the grid; convergence still applies
            NumericWindow w = effective_window(params_, t3, t_mid);
            step3_ = h0_frame(params_, space_, t3) * w.at_t3;
            step3_mid_ = std::move(w.at_mid);
            step3_report_ = w.report;
            break;
        }
        case SimMode::full: {
            NumericWindow w = full_window(params_, t3, t_mid);
            step3_ = h0_frame(params_, space_, t3) * w.at_t3;
            step3_mid_ = std::move(w.at_mid);
            step3_report_ = w.report;
            break;
        }
    }
}

std::pair<Ket, ProtocolTrace> ProtocolEngine::run(const Ket& initial) const {
    if (initial.space != space_) throw SpaceError("run_protocol: initial ket on the wrong space");
    ProtocolTrace trace;
    trace.mode = mode_;
    trace.warnings = warnings_;
    trace.step3_convergence = step3_report_;

    const double tau = params_.tau();
    const double durations[6] = {kPi / (4.0 * params_.omega_mw),
                                 kPi / (4.0 * params_.omega_drive),
                                 tau_cycles_ * tau,
                                 kPi / (4.0 * params_.omega_drive),
                                 kPi / (2.0 * params_.omega_drive),
                                 kPi / (4.0 * params_.omega_mw)};

    Ket state = initial;
    int pulse_idx = 0;
    for (int step = 1; step <= 6; ++step) {
        ProtocolStep rec;
        rec.id = step;
        rec.duration = durations[step - 1];
        if (step == 3) {
            rec.kind = "dispersive";
            const double mid_leak = ket_top_leak(step3_mid_ * state);
            state = step3_ * state;
            rec.top_leak = std::max(mid_leak, ket_top_leak(state));
            if (mode_ != SimMode::analytic && rec.top_leak > params_.leak_threshold) {
                char msg[128];
                std::snprintf(msg, sizeof(msg),
                              "run_protocol: step-3 top-Fock population %.3g exceeds the leak "
                              "threshold %.3g; raise the Fock cutoffs",
                              rec.top_leak, params_.leak_threshold);
                throw TruncationError(msg);
            }
        } else {
            rec.kind = "pulse";
            rec.pulse = pulse_specs_[pulse_idx];
            state = pulses_[pulse_idx] * state;
            rec.top_leak = ket_top_leak(state);
            ++pulse_idx;
        }
        const double norm_err = std::abs(state.norm() - 1.0);
        if (norm_err > 1e-10) {
            char msg[96];
            std::snprintf(msg, sizeof(msg), "run_protocol: state norm drifted by %.3g after step %d",
                          norm_err, step);
            throw SimulationError(msg);
        }
        rec.post_state = state;
        trace.steps.push_back(std::move(rec));
    }
    return {state, std::move(trace)};
}

std::pair<Ket, ProtocolTrace> run_protocol(const SystemParams& p, SimMode mode, const Ket& initial,
                                           int tau_cycles) {
    ProtocolEngine engine(p, mode, tau_cycles);
    return engine.run(initial);
}

GateResult extract_gate(const SystemParams& p, SimMode mode, int fock_ref, int tau_cycles) {
    ProtocolEngine engine(p, mode, tau_cycles);
    const HilbertSpace& space = engine.space();
    if (fock_ref < 0 || fock_ref >= space.factor_dim("c"))
        throw SimulationError("extract_gate: field reference Fock level outside cutoff");

    GateResult result;
    result.gate = Matrix::Zero(4, 4);
    result.warnings = engine.warnings();

    double max_col_leak = 0.0;
    for (int col = 0; col < 4; ++col) {
        const int a1 = col >> 1, a2 = col & 1;
        Ket input = Ket::basis(space, {{"atom1", a1}, {"atom2", a2}, {"c", fock_ref}});
        auto [final_state, trace] = engine.run(input);
        double col_norm_sq = 0.0;
        for (int row = 0; row < 4; ++row) {
            Ket ref = Ket::basis(space,
                                 {{"atom1", row >> 1}, {"atom2", row & 1}, {"c", fock_ref}});
            const Complex amp = ref.overlap(final_state);
            result.gate(row, col) = amp;
            col_norm_sq += std::norm(amp);
        }
        max_col_leak = std::max(max_col_leak, 1.0 - col_norm_sq);
    }
    result.leakage = max_col_leak;

    // Theta from the |1x> block: gate(2,2) = e^{-i Theta} cos Theta,
    // gate(3,2) = -i e^{-i Theta} sin Theta; the magnitude ratio is global
    // phase free and the relative phase fixes the sign.
    const Complex m_keep = result.gate(2, 2);
    const Complex m_flip = result.gate(3, 2);
    double theta = std::atan2(std::abs(m_flip), std::abs(m_keep));
    if (std::real(kI * m_flip * std::conj(m_keep)) < 0.0) theta = -theta;
    result.theta_est = theta;
    if (result.leakage > kGateLeakThreshold) {
        result.warnings.push_back("gate leakage above threshold: theta_est unreliable");
    }

    result.fidelity_valid = p.regime().integer_drive_ratio;
    if (result.fidelity_valid) {
        const Matrix target = target_gate(tau_cycles * theta_of_g(p));
        const Complex tr = (result.gate.adjoint() * target).trace();
        result.fidelity_vs_target = std::norm(tr) / 16.0;
    }
    return result;
}

Matrix target_gate(double theta) {
    Matrix g = Matrix::Identity(4, 4);
    const Complex phase = std::exp(-kI * theta);
    g(2, 2) = phase * std::cos(theta);
    g(3, 3) = phase * std::cos(theta);
    g(3, 2) = -kI * phase * std::sin(theta);
    g(2, 3) = -kI * phase * std::sin(theta);
    return g;
}

double theta_of_g(const SystemParams& p) {
    return p.g * p.g * std::numbers::pi / (4.0 * p.delta * p.delta);
}

double total_gate_time(const SystemParams& p) {
    return std::numbers::pi / (2.0 * p.omega_mw) + std::numbers::pi / p.omega_drive +
           2.0 * std::numbers::pi / p.delta;
}

std::pair<double, double> discrete_u_times(const SystemParams& p, int n) {
    if (n < 1) throw SimulationError("discrete_u_times: n must be >= 1");
    return {n * p.tau(), n * theta_of_g(p)};
}

}  // namespace ccagate
