#ifndef CCAGATE_LINALG_HPP
#define CCAGATE_LINALG_HPP

#include "ccagate/hilbert.hpp"

namespace ccagate {

// Kronecker product on concatenated factor lists.  Labels must be disjoint.
Operator tensor(const Operator& a, const Operator& b);

// Lift a single-factor operator into `target`, identity on all other factors.
Operator embed(const Operator& op, const HilbertSpace& target, std::string_view factor_label);

// Truncated bosonic annihilation operator, <n-1|a|n> = sqrt(n), on a
// one-factor space labelled `label`.  cutoff >= 2.
Operator destroy(int cutoff, const std::string& label = "mode");

// Annihilation operator for factor `label` embedded in `space`.
Operator mode_destroy(const HilbertSpace& space, std::string_view label);

// Number operator for factor `label` embedded in `space`.
Operator mode_number(const HilbertSpace& space, std::string_view label);

// exp(-i h dt) for Hermitian h via eigendecomposition; unitary by construction.
Operator expm_propagator(const Operator& h, double dt);

// exp(m) for a general square matrix, scaling-and-squaring with a Taylor
// series run to a bounded tail.  Used only where the exponent is not
// Hermitian (closed-form displacement factors).
Matrix expm_general(const Matrix& m);

// Integer matrix power by binary exponentiation, n >= 0.
Matrix matrix_power(const Matrix& m, long n);

// Ordered product of midpoint-rule step propagators
//   U = prod_k exp(-i h(t_k) dt),  t_k = t0 + (k + 1/2) dt,
// latest factor on the left; second-order accurate in dt.  Every sampled
// h(t_k) is checked Hermitian.
Operator propagate_td(const TimeOperator& h, double t0, double t1, int steps);

struct ConvergenceReport {
    int steps = 0;               // step count of the accepted result
    double doubling_delta = 0;   // max-norm change of the final doubling
    double richardson_ratio = 0; // error contraction per doubling (~4 expected)
    bool converged = false;
};

// Runs propagate_td at steps, 2*steps, 4*steps ... until the doubling delta
// drops below tol (or max_doublings is hit); returns the finest result.
std::pair<Operator, ConvergenceReport> propagate_td_converged(
    const TimeOperator& h, double t0, double t1, int steps, double tol, int max_doublings = 12);

// Exact evaluation of the same midpoint product for the special family
//   h(t) = exp(+i k t) h_g exp(-i k t)
// with constant Hermitian k and h_g.  Each step factor conjugates the same
// exp(-i h_g dt), so the ordered product collapses to
//   X0^+ Y^-(N-1) (E0 Y)^(N-1) E0 X0,
// X(t) = exp(-i k t), Y = X(dt), E0 = exp(-i h_g dt); a pair of
// eigendecompositions and O(log N) multiplies replace N exponentials.
// Identical (up to roundoff) to propagate_td over the same h(t).
class PhasedProduct {
public:
    PhasedProduct(const Operator& k, const Operator& h_g);

    const HilbertSpace& space() const { return space_; }
    Operator evaluate(double t0, double t1, int steps) const;
    // doubles from n0 until the result moves less than tol
    std::pair<Operator, ConvergenceReport> converged(double t0, double t1, int n0, double tol,
                                                     int max_doublings = 12) const;

private:
    Matrix exp_k(double t) const;

    HilbertSpace space_;
    Matrix qk_, qg_;
    Eigen::VectorXd lam_k_, lam_g_;
};

Operator midpoint_product_phased(const Operator& k, const Operator& h_g,
                                 double t0, double t1, int steps);

// Same convergence driver as propagate_td_converged for the phased product.
std::pair<Operator, ConvergenceReport> midpoint_product_converged(
    const Operator& k, const Operator& h_g, double t0, double t1, int steps, double tol,
    int max_doublings = 12);

// Column indices of `space` whose bosonic factors (every factor other than
// atom1/atom2) all sit at Fock level <= max_fock.  Operator comparisons away
// from t = n*tau are meaningful only on this truncation-safe sector.
std::vector<int> low_fock_columns(const HilbertSpace& space, int max_fock);

// max |(a-b)_{r,c}| over all rows r and the given columns.
double max_abs_on_columns(const Matrix& a, const Matrix& b, const std::vector<int>& cols);

}  // namespace ccagate

#endif
