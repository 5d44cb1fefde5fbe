#include "ccagate/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

namespace ccagate {

double state_fidelity(const Ket& a, const Ket& b) {
    if (a.space != b.space) throw SpaceError("state_fidelity: space mismatch");
    return std::norm(a.overlap(b));
}

double gate_fidelity(const Matrix& u, const Matrix& v, double unitarity_tol) {
    if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() != u.cols())
        throw SpaceError("gate_fidelity: shape mismatch");
    if (unitarity_defect(u) > unitarity_tol || unitarity_defect(v) > unitarity_tol)
        throw SimulationError("gate_fidelity: input not unitary within tolerance");
    const double d = static_cast<double>(u.rows());
    return std::norm((u.adjoint() * v).trace()) / (d * d);
}

SweepResult sweep_theta(const SystemParams& p, const std::vector<double>& g_grid, SimMode mode,
                        int threads) {
    if (g_grid.empty()) throw SimulationError("sweep_theta: empty grid");
    for (size_t i = 1; i < g_grid.size(); ++i)
        if (!(g_grid[i] > g_grid[i - 1]))
            throw SimulationError("sweep_theta: grid must be strictly increasing");

    std::vector<GateResult> gates(g_grid.size());
    auto eval_point = [&](size_t i) { return extract_gate(p.with_g(g_grid[i]), mode); };
    if (threads > 1) {
        std::vector<std::future<GateResult>> futures;
        for (size_t i = 0; i < g_grid.size(); ++i)
            futures.push_back(std::async(std::launch::async, eval_point, i));
        for (size_t i = 0; i < g_grid.size(); ++i) gates[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < g_grid.size(); ++i) gates[i] = eval_point(i);
    }

    SweepResult result;
    result.expected_coefficient = std::numbers::pi / (4.0 * p.delta * p.delta);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < g_grid.size(); ++i) {
        SweepPoint pt;
        pt.g = g_grid[i];
        pt.theta_est = gates[i].theta_est;
        pt.theta_formula = theta_of_g(p.with_g(g_grid[i]));
        pt.leakage = gates[i].leakage;
        if (gates[i].leakage > kGateLeakThreshold) {
            pt.included = false;
            pt.status = "excluded: leakage above threshold";
        } else {
            // regime or drive-phase warnings flag the point but keep it
            pt.status = gates[i].warnings.empty() ? "ok" : "flagged: " + gates[i].warnings.front();
            num += pt.theta_est * pt.g * pt.g;
            den += pt.g * pt.g * pt.g * pt.g;
        }
        result.points.push_back(std::move(pt));
    }
    if (den == 0.0) throw SimulationError("sweep_theta: every grid point was excluded");
    result.fit_coefficient = num / den;
    for (auto& pt : result.points) {
        pt.residual = pt.included ? pt.theta_est - result.fit_coefficient * pt.g * pt.g : 0.0;
        if (pt.included) result.max_residual = std::max(result.max_residual, std::abs(pt.residual));
    }
    return result;
}

FieldState FieldEnsemble::vacuum() { return {"vacuum", {{0, 1.0}}}; }

FieldState FieldEnsemble::fock(int n) {
    if (n < 0) throw SimulationError("FieldEnsemble::fock: negative level");
    return {"fock:" + std::to_string(n), {{n, 1.0}}};
}

FieldState FieldEnsemble::thermal(double nbar, int max_fock) {
    if (nbar < 0.0) throw SimulationError("FieldEnsemble::thermal: negative mean occupation");
    FieldState s;
    s.label = "thermal:" + std::to_string(nbar);
    double total = 0.0;
    for (int n = 0; n <= max_fock; ++n) {
        const double w = std::pow(nbar / (1.0 + nbar), n) / (1.0 + nbar);
        s.fock_weights.emplace_back(n, w);
        total += w;
    }
    for (auto& [n, w] : s.fock_weights) w /= total;
    return s;
}

RobustnessResult robustness_scan(const SystemParams& p, const FieldEnsemble& ensemble,
                                 SimMode mode) {
    if (ensemble.states.empty()) throw SimulationError("robustness_scan: empty ensemble");

    int max_fock = 0;
    for (const auto& st : ensemble.states)
        for (const auto& [n, w] : st.fock_weights) max_fock = std::max(max_fock, n);
    if (max_fock >= p.cutoff_c)
        throw TruncationError("robustness_scan: ensemble Fock level " + std::to_string(max_fock) +
                              " at or above cutoff");

    // one gate extraction per distinct Fock level, shared across entries
    std::vector<GateResult> per_fock(max_fock + 1);
    std::vector<bool> have(max_fock + 1, false);
    for (const auto& st : ensemble.states)
        for (const auto& [n, w] : st.fock_weights)
            if (!have[n]) {
                per_fock[n] = extract_gate(p, mode, n);
                have[n] = true;
            }

    RobustnessResult result;
    for (const auto& st : ensemble.states) {
        double wsum = 0.0;
        for (const auto& [n, w] : st.fock_weights) wsum += w;
        if (std::abs(wsum - 1.0) > 1e-12)
            throw SimulationError("robustness_scan: ensemble weights of '" + st.label +
                                  "' do not sum to 1");
        RobustnessRow row;
        row.label = st.label;
        for (const auto& [n, w] : st.fock_weights) {
            row.theta_est += w * per_fock[n].theta_est;
            row.fidelity += w * per_fock[n].fidelity_vs_target;
            row.leakage += w * per_fock[n].leakage;
        }
        result.rows.push_back(std::move(row));
    }
    auto [lo, hi] = std::minmax_element(result.rows.begin(), result.rows.end(),
                                        [](const RobustnessRow& a, const RobustnessRow& b) {
                                            return a.theta_est < b.theta_est;
                                        });
    result.theta_spread = hi->theta_est - lo->theta_est;
    return result;
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "PASS";
        case CheckStatus::warn: return "WARN";
        case CheckStatus::fail: return "FAIL";
    }
    return "?";
}

bool RegimeReport::all_pass() const {
    return integer_drive_ratio &&
           std::all_of(rows.begin(), rows.end(),
                       [](const RegimeRow& r) { return r.status == CheckStatus::pass; });
}

RegimeReport regime_check(const SystemParams& p) {
    auto grade = [](double ratio) {
        if (ratio >= RegimeReport::kPassRatio) return CheckStatus::pass;
        if (ratio >= RegimeReport::kWarnRatio) return CheckStatus::warn;
        return CheckStatus::fail;
    };
    RegimeReport report;
    report.rows.push_back({"nu/g", p.nu / p.g, grade(p.nu / p.g)});
    report.rows.push_back({"omega_drive/g", p.omega_drive / p.g, grade(p.omega_drive / p.g)});
    report.rows.push_back(
        {"omega_drive/delta", p.omega_drive / p.delta, grade(p.omega_drive / p.delta)});
    report.integer_drive_ratio = p.regime().integer_drive_ratio;
    return report;
}

}  // namespace ccagate
