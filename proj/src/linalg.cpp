#include "ccagate/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>

namespace ccagate {

Operator tensor(const Operator& a, const Operator& b) {
    std::vector<Factor> factors = a.space.factors();
    for (const auto& f : b.space.factors()) {
        if (a.space.has_factor(f.label))
            throw SpaceError("tensor: factor label collision '" + f.label + "'");
        factors.push_back(f);
    }
    HilbertSpace joined(std::move(factors));
    const int na = a.dim(), nb = b.dim();
    Matrix out(na * nb, na * nb);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < na; ++j)
            out.block(i * nb, j * nb, nb, nb) = a.mat(i, j) * b.mat;
    return {std::move(joined), std::move(out)};
}

Operator embed(const Operator& op, const HilbertSpace& target, std::string_view factor_label) {
    if (op.space.num_factors() != 1)
        throw SpaceError("embed: operator must act on a single factor");
    const int fi = target.factor_index(factor_label);
    const int fdim = target.factors()[fi].dim;
    if (op.dim() != fdim)
        throw SpaceError("embed: operand dim does not match factor '" + std::string(factor_label) + "'");

    // dims to the left / right of the chosen factor
    int left = 1, right = 1;
    for (int i = 0; i < fi; ++i) left *= target.factors()[i].dim;
    for (int i = fi + 1; i < target.num_factors(); ++i) right *= target.factors()[i].dim;

    Matrix out = Matrix::Zero(target.total_dim(), target.total_dim());
    for (int l = 0; l < left; ++l)
        for (int r = 0; r < right; ++r)
            for (int i = 0; i < fdim; ++i)
                for (int j = 0; j < fdim; ++j) {
                    if (op.mat(i, j) == Complex{0.0, 0.0}) continue;
                    const int row = (l * fdim + i) * right + r;
                    const int col = (l * fdim + j) * right + r;
                    out(row, col) = op.mat(i, j);
                }
    return {target, std::move(out)};
}

Operator destroy(int cutoff, const std::string& label) {
    if (cutoff < 2) throw SpaceError("destroy: cutoff must be >= 2");
    Matrix a = Matrix::Zero(cutoff, cutoff);
    for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return {HilbertSpace({{label, cutoff}}), std::move(a)};
}

Operator mode_destroy(const HilbertSpace& space, std::string_view label) {
    return embed(destroy(space.factor_dim(label), std::string(label)), space, label);
}

Operator mode_number(const HilbertSpace& space, std::string_view label) {
    const int d = space.factor_dim(label);
    Matrix n = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
    return embed(Operator(HilbertSpace({{std::string(label), d}}), std::move(n)), space, label);
}

Operator expm_propagator(const Operator& h, double dt) {
    h.require_hermitian(1e-10 * std::max(1.0, max_abs(h.mat)), "expm_propagator");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat);
    const Eigen::VectorXd& lam = es.eigenvalues();
    Vector phases(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        phases(i) = std::exp(Complex(0.0, -lam(i) * dt));
    Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return {h.space, std::move(u)};
}

Matrix expm_general(const Matrix& m) {
    const int n = static_cast<int>(m.rows());
    const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    while (norm1 / std::pow(2.0, s) > 0.5) ++s;
    const Matrix ms = m / std::pow(2.0, s);

    Matrix result = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    // ||ms|| <= 0.5, so term norms fall at least geometrically with ratio 0.5
    // and the truncated tail is below the last retained term.
    for (int k = 1; k <= 40; ++k) {
        term = (ms * term) / static_cast<double>(k);
        result += term;
        if (max_abs(term) < 1e-18 * std::max(1.0, max_abs(result))) break;
    }
    for (int k = 0; k < s; ++k) result = result * result;
    return result;
}

Matrix matrix_power(const Matrix& m, long n) {
    if (n < 0) throw SimulationError("matrix_power: negative exponent");
    Matrix result = Matrix::Identity(m.rows(), m.cols());
    Matrix base = m;
    while (n > 0) {
        if (n & 1) result = result * base;
        base = base * base;
        n >>= 1;
    }
    return result;
}

Operator propagate_td(const TimeOperator& h, double t0, double t1, int steps) {
    if (!(t1 > t0)) throw SimulationError("propagate_td: need t1 > t0");
    if (steps < 1) throw SimulationError("propagate_td: need steps >= 1");
    const double dt = (t1 - t0) / steps;
    const int dim = h.space().total_dim();
    Matrix u = Matrix::Identity(dim, dim);
    for (int k = 0; k < steps; ++k) {
        const double tm = t0 + (k + 0.5) * dt;
        Operator hk = h.at(tm);
        u = expm_propagator(hk, dt).mat * u;
    }
    return {h.space(), std::move(u)};
}

namespace {

ConvergenceReport doubling_report(int steps, double delta_prev, double delta, double tol) {
    ConvergenceReport r;
    r.steps = steps;
    r.doubling_delta = delta;
    r.richardson_ratio = (delta > 0.0 && delta_prev > 0.0) ? delta_prev / delta : 0.0;
    r.converged = delta < tol;
    return r;
}

template <typename Runner>
std::pair<Operator, ConvergenceReport> converge_by_doubling(Runner run, int steps, double tol,
                                                            int max_doublings) {
    Operator prev = run(steps);
    double delta_prev = 0.0;
    for (int d = 0; d < max_doublings; ++d) {
        steps *= 2;
        Operator next = run(steps);
        const double delta = max_abs(next.mat - prev.mat);
        if (delta < tol) return {std::move(next), doubling_report(steps, delta_prev, delta, tol)};
        prev = std::move(next);
        delta_prev = delta;
    }
    char msg[128];
    std::snprintf(msg, sizeof(msg), "step doubling did not converge below %.3g by %d steps", tol,
                  steps);
    throw ConvergenceError(msg);
}

}  // namespace

std::pair<Operator, ConvergenceReport> propagate_td_converged(const TimeOperator& h, double t0,
                                                              double t1, int steps, double tol,
                                                              int max_doublings) {
    return converge_by_doubling([&](int n) { return propagate_td(h, t0, t1, n); }, steps, tol,
                                max_doublings);
}

PhasedProduct::PhasedProduct(const Operator& k, const Operator& h_g) : space_(k.space) {
    if (k.space != h_g.space) throw SpaceError("PhasedProduct: space mismatch");
    k.require_hermitian(1e-10 * std::max(1.0, max_abs(k.mat)), "PhasedProduct k");
    h_g.require_hermitian(1e-10 * std::max(1.0, max_abs(h_g.mat)), "PhasedProduct h_g");
    Eigen::SelfAdjointEigenSolver<Matrix> es_k(k.mat);
    qk_ = es_k.eigenvectors();
    lam_k_ = es_k.eigenvalues();
    Eigen::SelfAdjointEigenSolver<Matrix> es_g(h_g.mat);
    qg_ = es_g.eigenvectors();
    lam_g_ = es_g.eigenvalues();
}

Matrix PhasedProduct::exp_k(double t) const {  // exp(-i k t)
    Vector ph(lam_k_.size());
    for (Eigen::Index i = 0; i < lam_k_.size(); ++i) ph(i) = std::exp(Complex(0.0, -lam_k_(i) * t));
    return qk_ * ph.asDiagonal() * qk_.adjoint();
}

Operator PhasedProduct::evaluate(double t0, double t1, int steps) const {
    if (!(t1 > t0)) throw SimulationError("PhasedProduct: need t1 > t0");
    if (steps < 1) throw SimulationError("PhasedProduct: need steps >= 1");
    const double dt = (t1 - t0) / steps;

    Vector ph(lam_g_.size());
    for (Eigen::Index i = 0; i < lam_g_.size(); ++i) ph(i) = std::exp(Complex(0.0, -lam_g_(i) * dt));
    const Matrix e0 = qg_ * ph.asDiagonal() * qg_.adjoint();

    const Matrix x0 = exp_k(t0 + 0.5 * dt);
    if (steps == 1) return {space_, x0.adjoint() * e0 * x0};

    const Matrix y = exp_k(dt);
    const Matrix y_back = exp_k(-(steps - 1) * dt);  // Y^-(N-1), exact from the eigenbasis
    Matrix inner = matrix_power(e0 * y, steps - 1) * e0;
    Matrix u = x0.adjoint() * y_back * inner * x0;
    // one Newton step toward the polar factor: the repeated squaring lets
    // roundoff drift off the unitary manifold by ~2^log2(N) eps
    u = 0.5 * u * (3.0 * Matrix::Identity(u.rows(), u.cols()) - u.adjoint() * u);
    return {space_, std::move(u)};
}

std::pair<Operator, ConvergenceReport> PhasedProduct::converged(double t0, double t1, int n0,
                                                                double tol,
                                                                int max_doublings) const {
    return converge_by_doubling([&](int n) { return evaluate(t0, t1, n); }, n0, tol,
                                max_doublings);
}

Operator midpoint_product_phased(const Operator& k, const Operator& h_g, double t0, double t1,
                                 int steps) {
    return PhasedProduct(k, h_g).evaluate(t0, t1, steps);
}

std::pair<Operator, ConvergenceReport> midpoint_product_converged(const Operator& k,
                                                                  const Operator& h_g, double t0,
                                                                  double t1, int steps, double tol,
                                                                  int max_doublings) {
    return PhasedProduct(k, h_g).converged(t0, t1, steps, tol, max_doublings);
}

std::vector<int> low_fock_columns(const HilbertSpace& space, int max_fock) {
    std::vector<int> bosonic;
    for (int i = 0; i < space.num_factors(); ++i) {
        const std::string& label = space.factors()[i].label;
        if (label != "atom1" && label != "atom2") bosonic.push_back(i);
    }
    std::vector<int> cols;
    for (int idx = 0; idx < space.total_dim(); ++idx) {
        bool ok = true;
        for (int fi : bosonic) {
            // never include a factor's top level, whatever max_fock says
            const int bound = std::min(max_fock, space.factors()[fi].dim - 2);
            if (space.level_of(idx, fi) > bound) { ok = false; break; }
        }
        if (ok) cols.push_back(idx);
    }
    return cols;
}

double max_abs_on_columns(const Matrix& a, const Matrix& b, const std::vector<int>& cols) {
    double worst = 0.0;
    for (int c : cols) worst = std::max(worst, (a.col(c) - b.col(c)).cwiseAbs().maxCoeff());
    return worst;
}

}  // namespace ccagate
