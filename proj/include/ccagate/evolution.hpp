#ifndef CCAGATE_EVOLUTION_HPP
#define CCAGATE_EVOLUTION_HPP

#include "ccagate/system_model.hpp"

#include <optional>

// Propagators for the dispersive interaction, produced three ways:
//
//   closed     U'(t) = e^{-iA(t) S^2} e^{-iB(t) c S} e^{-iB*(t) c^+ S},
//              S = sigma~_z1 - sigma~_z2, with
//              B(t) = -(g / 2 sqrt(2) i delta) (e^{-i delta t} - 1)
//              A(t) = -(g^2 / 8 delta) (t - (e^{i delta t} - 1) / i delta),
//              the unique solution of i dU/dt = H_eff U with U(0) = 1
//              (A picks up an imaginary part away from t = n tau that exactly
//              compensates the non-unitary middle factors).
//   effective  midpoint product under H_eff(t).
//   full       midpoint product under H'(t) in the three-mode frame.
//
// At t = tau = 2 pi / delta the loop closes: B = 0, A = -lambda tau with
// lambda = g^2 / 8 delta, and U'(tau) = e^{i lambda tau S^2} acts on the
// atoms alone, independent of the field state.

namespace ccagate {

struct ABCoefficients {
    Complex a_val;
    Complex b_val;
    double t = 0.0;
};

// Closed forms above.
ABCoefficients ab_coefficients(const SystemParams& p, double t);

// Same coefficients by RK4 integration of dB/dt = (g / 2 sqrt 2) e^{-i delta t},
// dA/dt = i (dB/dt)* B.  Independent check of the closed forms; the quadrature
// is the authority if they ever disagree.
ABCoefficients ab_coefficients_ode(const SystemParams& p, double t, int steps = 20000);

// Closed-form propagator on `space` (any space holding atom1, atom2, c).
// Throws TruncationError when the displacement leaks above
// p.leak_threshold out of the truncation-safe sector (columns with every
// bosonic factor at Fock <= 2).
Operator u_prime_closed(const SystemParams& p, double t, const HilbertSpace& space);

// Test/verification hook: same operator with externally supplied A, B.
Operator u_prime_closed_ab(const ABCoefficients& ab, const HilbertSpace& space);

// Composite one-loop operator e^{-i H0 tau} U'(tau) on `space`; includes the
// field part of e^{-i H0 tau} (phases on c+/c- Fock states) where those
// factors exist.  With omega_drive an integer multiple of delta the drive
// phases close and the atomic action is e^{i lambda tau S^2}.
Operator u_total(const SystemParams& p, const HilbertSpace& space);

// Midpoint product under H_eff over [0, t] on the effective space.  steps = 0
// picks the default (200 per delta period, scaled by t) and doubles until the
// result moves less than kEffectiveDoublingTol.
inline constexpr double kEffectiveDoublingTol = 1e-7;
inline constexpr double kFullDoublingTol = 1e-6;

Operator u_effective_numeric(const SystemParams& p, double t, int steps = 0,
                             ConvergenceReport* report = nullptr);

// Midpoint product under H'(t) over [0, t] on the full space (rotated frame,
// steps default 200 per drive period).
Operator u_full_numeric(const SystemParams& p, double t, int steps = 0,
                        ConvergenceReport* report = nullptr);

// One protocol window of numeric propagation: the converged propagator over
// [0, t3] plus a same-grid evaluation at t_mid (the displacement maximum,
// used as the truncation-leak probe); shares one eigen decomposition pair.
struct NumericWindow {
    Operator at_t3;
    Operator at_mid;
    ConvergenceReport report;
};

NumericWindow effective_window(const SystemParams& p, double t3, double t_mid, int steps = 0);
NumericWindow full_window(const SystemParams& p, double t3, double t_mid, int steps = 0);

struct PropagatorBundle {
    Operator u_closed;                    // effective space, t = tau
    Operator u_effective;                 // effective space, t = tau
    std::optional<Operator> u_full;       // full space, t = tau
    ConvergenceReport effective_report;
    ConvergenceReport full_report;
    double closed_vs_effective = 0.0;     // max-norm on the safe sector
};

PropagatorBundle build_propagator_bundle(const SystemParams& p, bool include_full);

// Relative residual || i dU'/dt - H_eff U' || / || H_eff || at time t, dU'/dt
// by central difference with half-width h, both norms max-abs on the
// truncation-safe sector.  corrupt_a_sign flips the sign of A first (negative
// control for the verify command).
double schrodinger_residual_closed(const SystemParams& p, const HilbertSpace& space, double t,
                                   double h = 1e-3, bool corrupt_a_sign = false);

}  // namespace ccagate

#endif
