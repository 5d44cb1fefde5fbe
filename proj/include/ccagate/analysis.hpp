#ifndef CCAGATE_ANALYSIS_HPP
#define CCAGATE_ANALYSIS_HPP

#include "ccagate/protocol.hpp"

namespace ccagate {

// |<a|b>|^2
double state_fidelity(const Ket& a, const Ket& b);

// |tr(u^+ v)|^2 / d^2, global-phase invariant.  Both matrices must be unitary
// to `unitarity_tol` (full-mode gates carry leakage; pass a looser bound).
double gate_fidelity(const Matrix& u, const Matrix& v, double unitarity_tol = 1e-6);

struct SweepPoint {
    double g = 0.0;
    double theta_est = 0.0;
    double theta_formula = 0.0;
    double residual = 0.0;   // theta_est - c_fit * g^2
    double leakage = 0.0;
    bool included = true;    // false when leakage excluded the point
    std::string status;      // "ok" or the exclusion/warning reason
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double fit_coefficient = 0.0;       // least squares for theta = c g^2, through the origin
    double expected_coefficient = 0.0;  // pi / (4 delta^2)
    double max_residual = 0.0;          // over included points
};

// Re-runs extract_gate across the coupling grid (strictly increasing) and
// fits the quadratic law.  Points whose gate leakage exceeds
// kGateLeakThreshold are excluded from the fit and flagged.
SweepResult sweep_theta(const SystemParams& p, const std::vector<double>& g_grid, SimMode mode,
                        int threads = 1);

struct FieldState {
    std::string label;
    // Fock-diagonal weights; a pure Fock state has a single unit entry.
    std::vector<std::pair<int, double>> fock_weights;
};

struct FieldEnsemble {
    std::vector<FieldState> states;

    static FieldState vacuum();
    static FieldState fock(int n);
    // Truncated Bose-Einstein weights p_n ~ nbar^n / (1+nbar)^{n+1},
    // renormalized over n <= max_fock.
    static FieldState thermal(double nbar, int max_fock);
};

struct RobustnessRow {
    std::string label;
    double theta_est = 0.0;
    double fidelity = 0.0;
    double leakage = 0.0;
};

struct RobustnessResult {
    std::vector<RobustnessRow> rows;
    double theta_spread = 0.0;  // max - min over rows
};

// Per field state, re-run the gate extraction with that Fock reference.
// Thermal entries are weight-averaged over their Fock components (the
// protocol is linear in the field density operator, so this is exact).
RobustnessResult robustness_scan(const SystemParams& p, const FieldEnsemble& ensemble,
                                 SimMode mode);

enum class CheckStatus { pass, warn, fail };

std::string to_string(CheckStatus s);

struct RegimeRow {
    std::string name;
    double value = 0.0;
    CheckStatus status = CheckStatus::pass;
};

struct RegimeReport {
    std::vector<RegimeRow> rows;
    bool integer_drive_ratio = false;
    bool all_pass() const;
    // pass >= 10, warn >= 3, fail below; the 10/3 cuts are tool conventions,
    // not physical constants, and are printed with every report.
    static constexpr double kPassRatio = 10.0;
    static constexpr double kWarnRatio = 3.0;
};

RegimeReport regime_check(const SystemParams& p);

}  // namespace ccagate

#endif
