#include "ccagate/hilbert.hpp"

#include <algorithm>
#include <unordered_set>

namespace ccagate {

HilbertSpace::HilbertSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw SpaceError("HilbertSpace: no factors");
    std::unordered_set<std::string> seen;
    for (const auto& f : factors_) {
        if (f.dim < 1) throw SpaceError("HilbertSpace: factor '" + f.label + "' has dim < 1");
        if (!seen.insert(f.label).second)
            throw SpaceError("HilbertSpace: duplicate factor label '" + f.label + "'");
    }
    strides_.assign(factors_.size(), 1);
    for (int i = static_cast<int>(factors_.size()) - 2; i >= 0; --i)
        strides_[i] = strides_[i + 1] * factors_[i + 1].dim;
    total_dim_ = strides_[0] * factors_[0].dim;
}

bool HilbertSpace::has_factor(std::string_view label) const {
    return std::any_of(factors_.begin(), factors_.end(),
                       [&](const Factor& f) { return f.label == label; });
}

int HilbertSpace::factor_index(std::string_view label) const {
    for (int i = 0; i < num_factors(); ++i)
        if (factors_[i].label == label) return i;
    throw SpaceError("HilbertSpace: unknown factor label '" + std::string(label) + "'");
}

int HilbertSpace::factor_dim(std::string_view label) const {
    return factors_[factor_index(label)].dim;
}

int HilbertSpace::pack(const std::vector<int>& levels) const {
    if (static_cast<int>(levels.size()) != num_factors())
        throw SpaceError("HilbertSpace::pack: wrong number of levels");
    int idx = 0;
    for (int i = 0; i < num_factors(); ++i) {
        if (levels[i] < 0 || levels[i] >= factors_[i].dim)
            throw SpaceError("HilbertSpace::pack: level out of range for '" + factors_[i].label + "'");
        idx += levels[i] * strides_[i];
    }
    return idx;
}

int HilbertSpace::level_of(int idx, int factor_idx) const {
    return (idx / strides_[factor_idx]) % factors_[factor_idx].dim;
}

bool HilbertSpace::operator==(const HilbertSpace& other) const {
    if (factors_.size() != other.factors_.size()) return false;
    for (size_t i = 0; i < factors_.size(); ++i)
        if (factors_[i].label != other.factors_[i].label || factors_[i].dim != other.factors_[i].dim)
            return false;
    return true;
}

Operator::Operator(HilbertSpace s, Matrix m) : space(std::move(s)), mat(std::move(m)) {
    if (mat.rows() != mat.cols()) throw SpaceError("Operator: matrix not square");
    if (mat.rows() != space.total_dim()) throw SpaceError("Operator: dimension does not match space");
}

void Operator::require_hermitian(double tol, std::string_view what) const {
    const double defect = hermiticity_defect();
    if (!(defect < tol))
        throw NonHermitianError(std::string(what) + ": hermiticity defect " + std::to_string(defect));
}

Operator Operator::identity(const HilbertSpace& s) {
    return {s, Matrix::Identity(s.total_dim(), s.total_dim())};
}

Operator Operator::zero(const HilbertSpace& s) {
    return {s, Matrix::Zero(s.total_dim(), s.total_dim())};
}

namespace {
void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* op) {
    if (a != b) throw SpaceError(std::string("operator ") + op + ": space mismatch");
}
}  // namespace

Operator operator+(const Operator& a, const Operator& b) {
    require_same_space(a.space, b.space, "+");
    return {a.space, a.mat + b.mat};
}

Operator operator-(const Operator& a, const Operator& b) {
    require_same_space(a.space, b.space, "-");
    return {a.space, a.mat - b.mat};
}

Operator operator*(const Operator& a, const Operator& b) {
    require_same_space(a.space, b.space, "*");
    return {a.space, a.mat * b.mat};
}

Operator operator*(Complex c, const Operator& a) { return {a.space, c * a.mat}; }
Operator operator*(double c, const Operator& a) { return {a.space, c * a.mat}; }

Ket::Ket(HilbertSpace s, Vector a) : space(std::move(s)), amp(std::move(a)) {
    if (amp.size() != space.total_dim()) throw SpaceError("Ket: dimension does not match space");
}

Complex Ket::overlap(const Ket& other) const {
    if (space != other.space) throw SpaceError("Ket::overlap: space mismatch");
    return amp.dot(other.amp);  // Eigen dot conjugates the left argument
}

Ket Ket::basis(const HilbertSpace& s, const std::vector<std::pair<std::string, int>>& levels) {
    std::vector<int> lv(s.num_factors(), 0);
    for (const auto& [label, level] : levels) lv[s.factor_index(label)] = level;
    Vector v = Vector::Zero(s.total_dim());
    v(s.pack(lv)) = 1.0;
    return {s, std::move(v)};
}

Ket operator*(const Operator& op, const Ket& k) {
    if (op.space != k.space) throw SpaceError("Operator*Ket: space mismatch");
    return {k.space, op.mat * k.amp};
}

}  // namespace ccagate
