#ifndef CCAGATE_HILBERT_HPP
#define CCAGATE_HILBERT_HPP

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Hilbert-space bookkeeping for dense complex linear algebra on small
// tensor-product spaces.  Factor ordering is fixed at construction and the
// flat index uses factor 0 as the slowest (leftmost Kronecker) index, so
// tensor(A, B) has index i_A * dim_B + i_B.

namespace ccagate {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr Complex kI{0.0, 1.0};

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SpaceError : SimulationError {
    using SimulationError::SimulationError;
};
struct NonHermitianError : SimulationError {
    using SimulationError::SimulationError;
};
struct ConvergenceError : SimulationError {
    using SimulationError::SimulationError;
};
struct TruncationError : SimulationError {
    using SimulationError::SimulationError;
};

struct Factor {
    std::string label;
    int dim = 0;
};

class HilbertSpace {
public:
    HilbertSpace() = default;
    explicit HilbertSpace(std::vector<Factor> factors);

    int total_dim() const { return total_dim_; }
    const std::vector<Factor>& factors() const { return factors_; }
    int num_factors() const { return static_cast<int>(factors_.size()); }

    bool has_factor(std::string_view label) const;
    int factor_index(std::string_view label) const;  // throws SpaceError
    int factor_dim(std::string_view label) const;

    // Flat index of a product basis state, one level per factor in order.
    int pack(const std::vector<int>& levels) const;
    // Level of the given factor within flat index `idx`.
    int level_of(int idx, int factor_idx) const;

    bool operator==(const HilbertSpace& other) const;
    bool operator!=(const HilbertSpace& other) const { return !(*this == other); }

private:
    std::vector<Factor> factors_;
    std::vector<int> strides_;
    int total_dim_ = 1;
};

// Dense operator bound to a space.  Always square with dim == space dim.
struct Operator {
    HilbertSpace space;
    Matrix mat;

    Operator() = default;
    Operator(HilbertSpace s, Matrix m);

    int dim() const { return static_cast<int>(mat.rows()); }
    Operator adjoint() const { return {space, mat.adjoint()}; }
    double hermiticity_defect() const { return (mat - mat.adjoint()).cwiseAbs().maxCoeff(); }
    bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() < tol; }
    void require_hermitian(double tol = 1e-12, std::string_view what = "operator") const;

    static Operator identity(const HilbertSpace& s);
    static Operator zero(const HilbertSpace& s);
};

Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(Complex c, const Operator& a);
Operator operator*(double c, const Operator& a);

struct Ket {
    HilbertSpace space;
    Vector amp;

    Ket() = default;
    Ket(HilbertSpace s, Vector a);

    int dim() const { return static_cast<int>(amp.size()); }
    double norm() const { return amp.norm(); }
    // <this|other>
    Complex overlap(const Ket& other) const;

    // Product basis state; factors not named in `levels` start in level 0.
    static Ket basis(const HilbertSpace& s,
                     const std::vector<std::pair<std::string, int>>& levels = {});
};

Ket operator*(const Operator& op, const Ket& k);

// Time-dependent Hermitian operator on a fixed space, t in units of 1/delta.
class TimeOperator {
public:
    TimeOperator() = default;
    TimeOperator(HilbertSpace space, std::function<Matrix(double)> fn)
        : space_(std::move(space)), fn_(std::move(fn)) {}

    const HilbertSpace& space() const { return space_; }
    Operator at(double t) const { return Operator(space_, fn_(t)); }

private:
    HilbertSpace space_;
    std::function<Matrix(double)> fn_;
};

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double unitarity_defect(const Matrix& u) {
    return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
}

}  // namespace ccagate

#endif
