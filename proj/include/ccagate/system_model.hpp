#ifndef CCAGATE_SYSTEM_MODEL_HPP
#define CCAGATE_SYSTEM_MODEL_HPP

#include "ccagate/linalg.hpp"

#include <optional>

// Model builders for two driven three-level atoms in fiber-linked cavities.
//
// Conventions, asserted project-wide:
//   * hbar = 1; every rate is expressed in units of the dispersive detuning
//     delta unless a config says otherwise.
//   * Atomic levels |0> = 0, |1> = 1, |i> = 2 (|i> is the excited level of
//     the driven 1 <-> i transition).
//   * Factor order: atom1(3) x atom2(3) x mode c x mode c+ x mode c-.
//   * The photonic normal modes are
//       c   = (a1 - e^{-i phi} a2) / sqrt(2)
//       c+- = (a1 + e^{-i phi} a2 +- sqrt(2) b) / 2,
//     which diagonalize the cavity-fiber hopping
//       H_cf = nu b (a1^+ + e^{i phi} a2^+) + h.c.
//     exactly, giving sqrt(2) nu (n+ - n-).  The dark mode c decouples.
//
// Two dynamics frames are built here: the "full" normal-mode frame
// (H = H0 + H1, three bosonic modes) and the "effective" dispersive frame
// (single dark mode, obtained after dropping terms rotating at 2*Omega and
// delta -+ sqrt(2) nu).  The lab-frame cavity-fiber form exists only for the
// structural diagonalization checks, never as a dynamics path.

namespace ccagate {

struct RegimeFlags {
    bool strong_fiber = false;      // nu >= 10 g
    bool strong_drive = false;      // Omega_drive >= 10 max(g, delta)
    bool integer_drive_ratio = false;  // Omega_drive / delta integer (phase closure)
};

struct SystemParams {
    double g = 0.1;            // atom-cavity coupling
    double delta = 1.0;        // detuning omega_c - omega_1i (the rate unit)
    double nu = 10.0;          // cavity-fiber coupling
    double omega_drive = 50.0; // classical drive Rabi frequency on 1 <-> i
    double omega_mw = 10.0;    // microwave Rabi frequency on 0 <-> 1
    double fiber_phase = 0.0;  // propagation phase phi through the fiber

    int cutoff_c = 10;         // Fock cutoff, dark mode
    int cutoff_pm = 4;         // Fock cutoff, each of c+ / c-
    int td_steps = 0;          // midpoint steps per tau; 0 = per-mode default
    double leak_threshold = 1e-6;  // top-Fock-level population flag/error bound

    double tau() const;                       // 2 pi / delta
    double lambda() const;                    // g^2 / (8 delta)
    RegimeFlags regime() const;
    // Throws SimulationError on invariant violations (g, delta, rabi > 0 ...).
    // A non-integer omega_drive/delta is a warning, reported via regime().
    void validate() const;

    SystemParams with_g(double new_g) const;
};

HilbertSpace effective_space(const SystemParams& p);  // atom1 x atom2 x c
HilbertSpace full_space(const SystemParams& p);       // atom1 x atom2 x c x cp x cm
HilbertSpace lab_space(const SystemParams& p);        // a1 x a2 x b (structural tests)

// New-basis atomic table: |+->_j = (|1>_j +- |i>_j)/sqrt(2), sigma~_z |+-> =
// +-|+->, sigma~_z |0> = 0, sigma~_+- |-+> = |+->.  Kets live on a
// one-factor atom space; operators are embedded in the space given at
// construction.
class AtomBasisMap {
public:
    explicit AtomBasisMap(HilbertSpace space);

    const HilbertSpace& space() const { return space_; }
    const Operator& sz(int atom) const;          // sigma~_z, atom 1 or 2
    const Operator& s_plus(int atom) const;      // sigma~_+
    const Operator& s_minus(int atom) const;     // sigma~_-
    const Operator& sigma_plus(int atom) const;  // bare |i><1|

    static Ket plus_ket(int atom);   // on a single-atom space
    static Ket minus_ket(int atom);

    // 3x3 blocks in the |0>,|1>,|i> basis
    static Matrix sigma_plus_block();
    static Matrix sz_block();
    static Matrix s_plus_block();

private:
    HilbertSpace space_;
    Operator sz_[2], sp_[2], sm_[2], sigp_[2];
};

// Lab-frame cavity-fiber hopping, nu b (a1^+ + e^{i phi} a2^+) + h.c.
Operator h_cavity_fiber(const SystemParams& p);

struct NormalModes {
    Operator c;       // dark mode
    Operator c_plus;
    Operator c_minus;
};

// Normal-mode annihilation operators on the lab space.
NormalModes normal_modes(const SystemParams& p);

// H0 = sqrt(2) nu (n+ - n-) + Omega_drive (sigma~_z1 + sigma~_z2).
// On the effective space the c+- factors are absent and only the drive term
// remains (those modes sit in vacuum there).
Operator h0(const SystemParams& p, const HilbertSpace& space);

// e^{-i H0 t}, assembled factor by factor from closed 3x3 / diagonal blocks.
// Equal to expm_propagator(h0(p, space), t) but keeps H0's degenerate
// sectors exactly aligned, so field-diagonal entries are bitwise identical
// across Fock levels.
Operator h0_frame(const SystemParams& p, const HilbertSpace& space, double t);

// Positive-frequency coupling G with H1(t) = e^{-i delta t} G + h.c.,
//   G = (g/2) [ (c+ + sqrt(2) c + c-) sigma_+1 + (c+ - sqrt(2) c + c-) sigma_+2 ].
Operator h1_coupling(const SystemParams& p, const HilbertSpace& space);

Operator h1(const SystemParams& p, const HilbertSpace& space, double t);

// Rotated frame H'(t) = e^{i H0 t} H1(t) e^{-i H0 t}, conjugation done with
// the eigendecomposition of H0 (computed once and captured).
TimeOperator h_rotated(const SystemParams& p, const HilbertSpace& space);

// Dispersive coupling H_eff(t) = (g / 2 sqrt(2)) (c e^{-i delta t} + h.c.)
// (sigma~_z1 - sigma~_z2) on the effective space.
TimeOperator h_eff(const SystemParams& p, const HilbertSpace& space);

// Static factor pair for the phase-ladder midpoint product:
// h(t) = e^{i k t} h_g e^{-i k t}.
struct PhasedFrame {
    Operator k;
    Operator h_g;
};

// h_eff(t) in phased form: k = delta n_c, h_g = H_eff(0).
PhasedFrame h_eff_frame(const SystemParams& p, const HilbertSpace& space);

// H'(t) in phased form: k = delta (n_c + n_+ + n_-) + H0, h_g = G + G^+.
PhasedFrame h_rotated_frame(const SystemParams& p, const HilbertSpace& space);

}  // namespace ccagate

#endif
