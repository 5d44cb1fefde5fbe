#include "ccagate/evolution.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <numbers>

namespace ccagate {

ABCoefficients ab_coefficients(const SystemParams& p, double t) {
    const double coeff = p.g / (2.0 * std::numbers::sqrt2);
    const Complex em = std::exp(-kI * p.delta * t);
    const Complex ep = std::exp(kI * p.delta * t);
    ABCoefficients ab;
    ab.t = t;
    ab.b_val = -(coeff / (kI * p.delta)) * (em - 1.0);
    ab.a_val = -(p.g * p.g / (8.0 * p.delta)) * (t - (ep - 1.0) / (kI * p.delta));
    return ab;
}

ABCoefficients ab_coefficients_ode(const SystemParams& p, double t, int steps) {
    const double coeff = p.g / (2.0 * std::numbers::sqrt2);
    auto db = [&](double s) { return coeff * std::exp(-kI * p.delta * s); };
    // dA/dt = i (dB/dt)* B needs B along the way; integrate the pair with RK4.
    Complex b = 0.0, a = 0.0;
    const double dt = t / steps;
    for (int k = 0; k < steps; ++k) {
        const double s = k * dt;
        const Complex k1b = db(s);
        const Complex k1a = kI * std::conj(db(s)) * b;
        const Complex k2b = db(s + 0.5 * dt);
        const Complex k2a = kI * std::conj(db(s + 0.5 * dt)) * (b + 0.5 * dt * k1b);
        const Complex k3b = db(s + 0.5 * dt);
        const Complex k3a = kI * std::conj(db(s + 0.5 * dt)) * (b + 0.5 * dt * k2b);
        const Complex k4b = db(s + dt);
        const Complex k4a = kI * std::conj(db(s + dt)) * (b + dt * k3b);
        b += (dt / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        a += (dt / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    }
    return {a, b, t};
}

Operator u_prime_closed_ab(const ABCoefficients& ab, const HilbertSpace& space) {
    AtomBasisMap atoms(space);
    Operator s = atoms.sz(1) - atoms.sz(2);
    Operator c = mode_destroy(space, "c");
    Operator s_sq = s * s;

    // e^{-i A S^2} with complex A, via the (real) eigenbasis of S^2
    Eigen::SelfAdjointEigenSolver<Matrix> es(s_sq.mat);
    Vector phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(-kI * ab.a_val * es.eigenvalues()(i));
    Matrix phase_factor = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();

    Matrix mid = expm_general((-kI * ab.b_val) * (c * s).mat);
    Matrix right = expm_general((-kI * std::conj(ab.b_val)) * (c.adjoint() * s).mat);
    return {space, phase_factor * mid * right};
}

namespace {

// Population of top Fock levels reachable from the safe sector; guards the
// closed form against displacements the cutoff cannot hold.
double top_level_leak(const Operator& u) {
    const HilbertSpace& space = u.space;
    std::vector<int> top_rows;
    for (int i = 0; i < space.num_factors(); ++i) {
        const auto& f = space.factors()[i];
        if (f.label == "atom1" || f.label == "atom2") continue;
        for (int idx = 0; idx < space.total_dim(); ++idx)
            if (space.level_of(idx, i) == f.dim - 1) top_rows.push_back(idx);
    }
    double worst = 0.0;
    for (int col : low_fock_columns(space, 2)) {
        double pop = 0.0;
        for (int r : top_rows) pop += std::norm(u.mat(r, col));
        worst = std::max(worst, pop);
    }
    return worst;
}

}  // namespace

Operator u_prime_closed(const SystemParams& p, double t, const HilbertSpace& space) {
    Operator u = u_prime_closed_ab(ab_coefficients(p, t), space);
    const double leak = top_level_leak(u);
    if (leak > p.leak_threshold) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "u_prime_closed: top-Fock leak %.3g exceeds threshold %.3g (raise cutoff_c "
                      "or leak_threshold)",
                      leak, p.leak_threshold);
        throw TruncationError(msg);
    }
    return u;
}

Operator u_total(const SystemParams& p, const HilbertSpace& space) {
    const double tau = p.tau();
    return h0_frame(p, space, tau) * u_prime_closed(p, tau, space);
}

namespace {

int default_steps_effective(const SystemParams& p, double t) {
    const double periods = t * p.delta / (2.0 * std::numbers::pi);
    const double base = p.td_steps > 0 ? p.td_steps * t / p.tau() : 200.0 * periods;
    return std::max(1, static_cast<int>(std::lround(base)));
}

int default_steps_full(const SystemParams& p, double t) {
    const double drive_periods = t * p.omega_drive / (2.0 * std::numbers::pi);
    const double base = p.td_steps > 0 ? p.td_steps * t / p.tau() : 200.0 * drive_periods;
    return std::max(1, static_cast<int>(std::lround(base)));
}

std::pair<Operator, ConvergenceReport> run_phased(const PhasedProduct& prod, double t, int n0,
                                                  bool fixed_steps, double tol) {
    if (fixed_steps) {
        // explicit step count: single doubling check, no refinement loop
        Operator u = prod.evaluate(0.0, t, n0);
        Operator u2 = prod.evaluate(0.0, t, 2 * n0);
        const double delta = max_abs(u2.mat - u.mat);
        ConvergenceReport rep{2 * n0, delta, 0.0, delta < tol};
        if (delta > tol) {
            char msg[128];
            std::snprintf(msg, sizeof(msg),
                          "time-dependent propagation: doubling moved the result by %.3g > %.3g",
                          delta, tol);
            throw ConvergenceError(msg);
        }
        return {std::move(u2), rep};
    }
    return prod.converged(0.0, t, n0, tol);
}

NumericWindow make_window(const PhasedFrame& frame, double t3, double t_mid, int n0,
                          bool fixed_steps, double tol) {
    PhasedProduct prod(frame.k, frame.h_g);
    NumericWindow w;
    auto [u, rep] = run_phased(prod, t3, n0, fixed_steps, tol);
    w.at_t3 = std::move(u);
    w.report = rep;
    const int mid_steps =
        std::max(1, static_cast<int>(std::lround(w.report.steps * t_mid / t3)));
    w.at_mid = prod.evaluate(0.0, t_mid, mid_steps);
    return w;
}

}  // namespace

Operator u_effective_numeric(const SystemParams& p, double t, int steps,
                             ConvergenceReport* report) {
    PhasedFrame frame = h_eff_frame(p, effective_space(p));
    const int n0 = steps > 0 ? steps : default_steps_effective(p, t);
    auto [u, rep] = run_phased(PhasedProduct(frame.k, frame.h_g), t, n0, steps > 0,
                               kEffectiveDoublingTol);
    if (report) *report = rep;
    return u;
}

Operator u_full_numeric(const SystemParams& p, double t, int steps, ConvergenceReport* report) {
    PhasedFrame frame = h_rotated_frame(p, full_space(p));
    const int n0 = steps > 0 ? steps : default_steps_full(p, t);
    auto [u, rep] = run_phased(PhasedProduct(frame.k, frame.h_g), t, n0, steps > 0,
                               kFullDoublingTol);
    if (report) *report = rep;
    return u;
}

NumericWindow effective_window(const SystemParams& p, double t3, double t_mid, int steps) {
    PhasedFrame frame = h_eff_frame(p, effective_space(p));
    const int n0 = steps > 0 ? steps : default_steps_effective(p, t3);
    return make_window(frame, t3, t_mid, n0, steps > 0, kEffectiveDoublingTol);
}

NumericWindow full_window(const SystemParams& p, double t3, double t_mid, int steps) {
    PhasedFrame frame = h_rotated_frame(p, full_space(p));
    const int n0 = steps > 0 ? steps : default_steps_full(p, t3);
    return make_window(frame, t3, t_mid, n0, steps > 0, kFullDoublingTol);
}

PropagatorBundle build_propagator_bundle(const SystemParams& p, bool include_full) {
    PropagatorBundle bundle;
    const double tau = p.tau();
    HilbertSpace eff = effective_space(p);
    bundle.u_closed = u_prime_closed(p, tau, eff);
    bundle.u_effective = u_effective_numeric(p, tau, 0, &bundle.effective_report);
    bundle.closed_vs_effective = max_abs_on_columns(bundle.u_closed.mat, bundle.u_effective.mat,
                                                    low_fock_columns(eff, 2));
    if (include_full) bundle.u_full = u_full_numeric(p, tau, 0, &bundle.full_report);
    return bundle;
}

double schrodinger_residual_closed(const SystemParams& p, const HilbertSpace& space, double t,
                                   double h, bool corrupt_a_sign) {
    auto ab_at = [&](double s) {
        ABCoefficients ab = ab_coefficients(p, s);
        if (corrupt_a_sign) ab.a_val = -ab.a_val;
        return ab;
    };
    Operator u_mid = u_prime_closed_ab(ab_at(t), space);
    Operator u_plus = u_prime_closed_ab(ab_at(t + h), space);
    Operator u_minus = u_prime_closed_ab(ab_at(t - h), space);
    Operator h_t = h_eff(p, space).at(t);

    Matrix du = kI * (u_plus.mat - u_minus.mat) / (2.0 * h);
    const auto cols = low_fock_columns(space, 2);
    const double num = max_abs_on_columns(du, h_t.mat * u_mid.mat, cols);
    const double den = max_abs(h_t.mat);
    return num / den;
}

}  // namespace ccagate
