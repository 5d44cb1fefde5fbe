#include "ccagate/system_model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace ccagate {

double SystemParams::tau() const { return 2.0 * std::numbers::pi / delta; }
double SystemParams::lambda() const { return g * g / (8.0 * delta); }

RegimeFlags SystemParams::regime() const {
    RegimeFlags f;
    f.strong_fiber = nu >= 10.0 * g;
    f.strong_drive = omega_drive >= 10.0 * std::max(g, delta);
    const double ratio = omega_drive / delta;
    f.integer_drive_ratio = std::abs(ratio - std::round(ratio)) < 1e-9;
    return f;
}

void SystemParams::validate() const {
    if (!(g > 0.0)) throw SimulationError("SystemParams: g must be > 0");
    if (!(delta > 0.0)) throw SimulationError("SystemParams: delta must be > 0");
    if (!(nu >= 0.0)) throw SimulationError("SystemParams: nu must be >= 0");
    if (!(omega_drive > 0.0)) throw SimulationError("SystemParams: omega_drive must be > 0");
    if (!(omega_mw > 0.0)) throw SimulationError("SystemParams: omega_mw must be > 0");
    if (cutoff_c < 2) throw SimulationError("SystemParams: cutoff_c must be >= 2");
    if (cutoff_pm < 2) throw SimulationError("SystemParams: cutoff_pm must be >= 2");
    if (td_steps < 0) throw SimulationError("SystemParams: td_steps must be >= 0");
    if (!(leak_threshold > 0.0)) throw SimulationError("SystemParams: leak_threshold must be > 0");
}

SystemParams SystemParams::with_g(double new_g) const {
    SystemParams q = *this;
    q.g = new_g;
    return q;
}

HilbertSpace effective_space(const SystemParams& p) {
    return HilbertSpace({{"atom1", 3}, {"atom2", 3}, {"c", p.cutoff_c}});
}

HilbertSpace full_space(const SystemParams& p) {
    return HilbertSpace(
        {{"atom1", 3}, {"atom2", 3}, {"c", p.cutoff_c}, {"cp", p.cutoff_pm}, {"cm", p.cutoff_pm}});
}

HilbertSpace lab_space(const SystemParams& p) {
    return HilbertSpace({{"a1", p.cutoff_pm}, {"a2", p.cutoff_pm}, {"b", p.cutoff_pm}});
}

Matrix AtomBasisMap::sigma_plus_block() {
    Matrix m = Matrix::Zero(3, 3);
    m(2, 1) = 1.0;  // |i><1|
    return m;
}

Matrix AtomBasisMap::sz_block() {
    // |+><+| - |-><-| = |1><i| + |i><1|
    Matrix m = Matrix::Zero(3, 3);
    m(1, 2) = 1.0;
    m(2, 1) = 1.0;
    return m;
}

Matrix AtomBasisMap::s_plus_block() {
    // |+><-| in the bare basis
    Matrix m = Matrix::Zero(3, 3);
    m(1, 1) = 0.5;
    m(1, 2) = -0.5;
    m(2, 1) = 0.5;
    m(2, 2) = -0.5;
    return m;
}

AtomBasisMap::AtomBasisMap(HilbertSpace space) : space_(std::move(space)) {
    for (int a = 0; a < 2; ++a) {
        const std::string label = a == 0 ? "atom1" : "atom2";
        HilbertSpace atom({{label, 3}});
        sz_[a] = embed(Operator(atom, sz_block()), space_, label);
        sp_[a] = embed(Operator(atom, s_plus_block()), space_, label);
        sm_[a] = embed(Operator(atom, s_plus_block().adjoint()), space_, label);
        sigp_[a] = embed(Operator(atom, sigma_plus_block()), space_, label);
    }
}

namespace {
int atom_slot(int atom) {
    if (atom != 1 && atom != 2) throw SpaceError("AtomBasisMap: atom index must be 1 or 2");
    return atom - 1;
}
}  // namespace

const Operator& AtomBasisMap::sz(int atom) const { return sz_[atom_slot(atom)]; }
const Operator& AtomBasisMap::s_plus(int atom) const { return sp_[atom_slot(atom)]; }
const Operator& AtomBasisMap::s_minus(int atom) const { return sm_[atom_slot(atom)]; }
const Operator& AtomBasisMap::sigma_plus(int atom) const { return sigp_[atom_slot(atom)]; }

Ket AtomBasisMap::plus_ket(int atom) {
    HilbertSpace atom_space({{atom == 1 ? "atom1" : "atom2", 3}});
    Vector v = Vector::Zero(3);
    v(1) = 1.0 / std::numbers::sqrt2;
    v(2) = 1.0 / std::numbers::sqrt2;
    return {atom_space, std::move(v)};
}

Ket AtomBasisMap::minus_ket(int atom) {
    HilbertSpace atom_space({{atom == 1 ? "atom1" : "atom2", 3}});
    Vector v = Vector::Zero(3);
    v(1) = 1.0 / std::numbers::sqrt2;
    v(2) = -1.0 / std::numbers::sqrt2;
    return {atom_space, std::move(v)};
}

Operator h_cavity_fiber(const SystemParams& p) {
    HilbertSpace lab = lab_space(p);
    Operator a1 = mode_destroy(lab, "a1");
    Operator a2 = mode_destroy(lab, "a2");
    Operator b = mode_destroy(lab, "b");
    const Complex phase = std::exp(kI * p.fiber_phase);
    Operator m = p.nu * (a1.adjoint() * b + phase * (a2.adjoint() * b));
    return m + m.adjoint();
}

NormalModes normal_modes(const SystemParams& p) {
    HilbertSpace lab = lab_space(p);
    Operator a1 = mode_destroy(lab, "a1");
    Operator a2 = mode_destroy(lab, "a2");
    Operator b = mode_destroy(lab, "b");
    // e^{-i phi} on a2 (not the conjugate) is what diagonalizes h_cavity_fiber
    // exactly for every phi; a local phase on atom 2's transition absorbs the
    // difference downstream.
    const Complex phase = std::exp(-kI * p.fiber_phase);
    NormalModes nm;
    nm.c = (1.0 / std::numbers::sqrt2) * (a1 - phase * a2);
    nm.c_plus = 0.5 * (a1 + phase * a2 + std::numbers::sqrt2 * b);
    nm.c_minus = 0.5 * (a1 + phase * a2 - std::numbers::sqrt2 * b);
    return nm;
}

Operator h0(const SystemParams& p, const HilbertSpace& space) {
    AtomBasisMap atoms(space);
    Operator h = p.omega_drive * (atoms.sz(1) + atoms.sz(2));
    if (space.has_factor("cp")) {
        h = h + std::numbers::sqrt2 * p.nu *
                    (mode_number(space, "cp") - mode_number(space, "cm"));
    }
    return h;
}

Operator h0_frame(const SystemParams& p, const HilbertSpace& space, double t) {
    // e^{-i Omega t sigma~_z}: identity on |0>, cos/-i sin rotation on {1, i}
    Matrix atom = Matrix::Identity(3, 3);
    const double theta = p.omega_drive * t;
    atom(1, 1) = std::cos(theta);
    atom(2, 2) = std::cos(theta);
    atom(1, 2) = -kI * std::sin(theta);
    atom(2, 1) = -kI * std::sin(theta);

    auto factor_block = [&](const Factor& f) {
        if (f.label == "atom1" || f.label == "atom2") return atom;
        Matrix d = Matrix::Identity(f.dim, f.dim);
        double rate = 0.0;  // the dark mode is free
        if (f.label == "cp") rate = std::numbers::sqrt2 * p.nu;
        if (f.label == "cm") rate = -std::numbers::sqrt2 * p.nu;
        for (int n = 0; n < f.dim; ++n) d(n, n) = std::exp(-kI * rate * t * double(n));
        return d;
    };

    const auto& factors = space.factors();
    Operator result(HilbertSpace({factors[0]}), factor_block(factors[0]));
    for (size_t i = 1; i < factors.size(); ++i)
        result = tensor(result, Operator(HilbertSpace({factors[i]}), factor_block(factors[i])));
    return {space, std::move(result.mat)};
}

Operator h1_coupling(const SystemParams& p, const HilbertSpace& space) {
    AtomBasisMap atoms(space);
    Operator c = mode_destroy(space, "c");
    Operator cp = mode_destroy(space, "cp");
    Operator cm = mode_destroy(space, "cm");
    const double s2 = std::numbers::sqrt2;
    Operator bright = cp + cm;
    return 0.5 * p.g *
           ((bright + s2 * c) * atoms.sigma_plus(1) + (bright - s2 * c) * atoms.sigma_plus(2));
}

Operator h1(const SystemParams& p, const HilbertSpace& space, double t) {
    Operator g_op = h1_coupling(p, space);
    Operator m = std::exp(-kI * p.delta * t) * g_op;
    return m + m.adjoint();
}

TimeOperator h_rotated(const SystemParams& p, const HilbertSpace& space) {
    Operator h0_op = h0(p, space);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h0_op.mat);
    Matrix q = es.eigenvectors();
    Eigen::VectorXd lam = es.eigenvalues();
    Operator g_op = h1_coupling(p, space);
    const double delta = p.delta;
    return TimeOperator(space, [q, lam, g_op, delta](double t) {
        Vector ph(lam.size());
        for (Eigen::Index i = 0; i < lam.size(); ++i) ph(i) = std::exp(Complex(0.0, -lam(i) * t));
        Matrix u0 = q * ph.asDiagonal() * q.adjoint();  // e^{-i H0 t}
        Matrix h1t = std::exp(-kI * delta * t) * g_op.mat;
        h1t += h1t.adjoint().eval();
        return Matrix(u0.adjoint() * h1t * u0);
    });
}

namespace {
Operator h_eff_static(const SystemParams& p, const HilbertSpace& space) {
    AtomBasisMap atoms(space);
    Operator c = mode_destroy(space, "c");
    Operator s = atoms.sz(1) - atoms.sz(2);
    return (p.g / (2.0 * std::numbers::sqrt2)) * ((c + c.adjoint()) * s);
}
}  // namespace

TimeOperator h_eff(const SystemParams& p, const HilbertSpace& space) {
    AtomBasisMap atoms(space);
    Operator c = mode_destroy(space, "c");
    Operator s = atoms.sz(1) - atoms.sz(2);
    const double coeff = p.g / (2.0 * std::numbers::sqrt2);
    const double delta = p.delta;
    Matrix c_mat = c.mat, s_mat = s.mat;
    return TimeOperator(space, [coeff, delta, c_mat, s_mat](double t) {
        Matrix field = std::exp(-kI * delta * t) * c_mat;
        field += field.adjoint().eval();
        return Matrix(coeff * field * s_mat);
    });
}

PhasedFrame h_eff_frame(const SystemParams& p, const HilbertSpace& space) {
    return {p.delta * mode_number(space, "c"), h_eff_static(p, space)};
}

PhasedFrame h_rotated_frame(const SystemParams& p, const HilbertSpace& space) {
    Operator number_total =
        mode_number(space, "c") + mode_number(space, "cp") + mode_number(space, "cm");
    Operator g_op = h1_coupling(p, space);
    return {p.delta * number_total + h0(p, space), g_op + g_op.adjoint()};
}

}  // namespace ccagate
