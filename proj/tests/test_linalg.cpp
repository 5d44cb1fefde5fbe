#include "ccagate/linalg.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace ccagate;

namespace {

Matrix random_hermitian(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = Complex(dist(rng), dist(rng));
    return (m + Matrix(m.adjoint())) / 2.0;
}

HilbertSpace qubit_space() { return HilbertSpace({{"q", 2}}); }

Operator pauli_z() {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    return {qubit_space(), z};
}

}  // namespace

TEST_CASE("hilbert space bookkeeping") {
    HilbertSpace s({{"atom1", 3}, {"atom2", 3}, {"c", 4}});
    CHECK(s.total_dim() == 36);
    CHECK(s.factor_index("c") == 2);
    CHECK(s.factor_dim("atom2") == 3);
    CHECK(s.pack({0, 0, 0}) == 0);
    CHECK(s.pack({1, 2, 3}) == 1 * 12 + 2 * 4 + 3);
    CHECK(s.level_of(s.pack({1, 2, 3}), 1) == 2);
    CHECK_THROWS_AS(s.factor_index("nope"), SpaceError);
    CHECK_THROWS_AS(HilbertSpace({{"a", 2}, {"a", 3}}), SpaceError);
}

TEST_CASE("tensor: identity and diagonal cases") {
    Operator i2 = Operator::identity(HilbertSpace({{"x", 2}}));
    Operator i3 = Operator::identity(HilbertSpace({{"y", 3}}));
    Operator t = tensor(i2, i3);
    CHECK(max_abs(t.mat - Matrix::Identity(6, 6)) == 0.0);

    Matrix d1(2, 2), d2(2, 2);
    d1 << 1, 0, 0, 2;
    d2 << 3, 0, 0, 4;
    Operator td = tensor(Operator(HilbertSpace({{"x", 2}}), d1),
                         Operator(HilbertSpace({{"y", 2}}), d2));
    Vector expected(4);
    expected << 3, 4, 6, 8;
    CHECK(max_abs(td.mat - Matrix(expected.asDiagonal())) == 0.0);

    CHECK_THROWS_AS(tensor(i2, i2), SpaceError);
}

TEST_CASE("tensor: raising times annihilation matrix elements") {
    // <i, n-1| sigma_+ (x) a |1, n> = sqrt(n), checked by direct index arithmetic
    const int cutoff = 6;
    Matrix sp = Matrix::Zero(3, 3);
    sp(2, 1) = 1.0;
    Operator t = tensor(Operator(HilbertSpace({{"atom", 3}}), sp), destroy(cutoff));
    for (int n = 1; n < cutoff; ++n) {
        const int row = 2 * cutoff + (n - 1);
        const int col = 1 * cutoff + n;
        CHECK(std::abs(t.mat(row, col) - std::sqrt(double(n))) < 1e-15);
    }
    // everything else vanishes
    double off = 0.0;
    for (int r = 0; r < t.dim(); ++r)
        for (int c = 0; c < t.dim(); ++c) {
            const bool expected = r / cutoff == 2 && c / cutoff == 1 && r % cutoff == c % cutoff - 1;
            if (!expected) off = std::max(off, std::abs(t.mat(r, c)));
        }
    CHECK(off == 0.0);
}

TEST_CASE("tensor is associative up to factor relabeling") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    auto rand_op = [&](const std::string& label, int d) {
        Matrix m(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = Complex(dist(rng), dist(rng));
        return Operator(HilbertSpace({{label, d}}), m);
    };
    Operator a = rand_op("a", 2), b = rand_op("b", 3), c = rand_op("c", 2);
    Matrix lhs = tensor(tensor(a, b), c).mat;
    Matrix rhs = tensor(a, tensor(b, c)).mat;
    CHECK(max_abs(lhs - rhs) < 1e-14);  // identical up to fp reassociation
}

TEST_CASE("embed: identity, ordering, number operator") {
    HilbertSpace target({{"atom1", 3}, {"atom2", 3}, {"c", 4}});
    Operator id3 = Operator::identity(HilbertSpace({{"atom2", 3}}));
    CHECK(max_abs(embed(id3, target, "atom2").mat - Matrix::Identity(36, 36)) == 0.0);

    // embedding on the first factor equals tensor(op, identity on the rest)
    Matrix sp = Matrix::Zero(3, 3);
    sp(2, 1) = 1.0;
    Operator op1(HilbertSpace({{"atom1", 3}}), sp);
    Operator rest = Operator::identity(HilbertSpace({{"atom2", 3}, {"c", 4}}));
    CHECK(max_abs(embed(op1, target, "atom1").mat - tensor(op1, rest).mat) == 0.0);

    // n_c |atom, atom, 1_c> = 1 |atom, atom, 1_c>
    Operator n_c = mode_number(target, "c");
    Ket k = Ket::basis(target, {{"atom1", 1}, {"atom2", 2}, {"c", 1}});
    Ket nk = n_c * k;
    CHECK(max_abs(nk.amp - k.amp) == 0.0);

    CHECK_THROWS_AS(embed(id3, target, "ghost"), SpaceError);
    CHECK_THROWS_AS(embed(Operator::identity(HilbertSpace({{"c", 3}})), target, "c"), SpaceError);
}

TEST_CASE("embeds on distinct factors commute exactly") {
    HilbertSpace target({{"atom1", 3}, {"c", 4}});
    Matrix sp = Matrix::Zero(3, 3);
    sp(2, 1) = 1.0;
    Operator x = embed(Operator(HilbertSpace({{"atom1", 3}}), sp), target, "atom1");
    Operator y = mode_destroy(target, "c");
    CHECK(max_abs((x * y - y * x).mat) == 0.0);
}

TEST_CASE("destroy: explicit matrix, number operator, truncated commutator") {
    Operator a2 = destroy(2);
    Matrix expected(2, 2);
    expected << 0, 1, 0, 0;
    CHECK(max_abs(a2.mat - expected) == 0.0);

    const int cutoff = 7;
    Operator a = destroy(cutoff);
    Matrix num = a.adjoint().mat * a.mat;
    for (int n = 0; n < cutoff; ++n) CHECK(std::abs(num(n, n) - double(n)) < 1e-14);

    Matrix comm = a.mat * a.adjoint().mat - num;
    for (int n = 0; n < cutoff - 1; ++n) CHECK(std::abs(comm(n, n) - 1.0) < 1e-14);
    // truncation artifact at the top Fock level
    CHECK(std::abs(comm(cutoff - 1, cutoff - 1) + double(cutoff - 1)) < 1e-12);

    CHECK_THROWS_AS(destroy(1), SpaceError);
}

TEST_CASE("expm_propagator: identity, eigenphases, semigroup, unitarity") {
    HilbertSpace q = qubit_space();
    Operator zero = Operator::zero(q);
    CHECK(max_abs(expm_propagator(zero, 0.7).mat - Matrix::Identity(2, 2)) < 1e-15);

    // eigenvalues +-1, dt = pi: both phases give -1
    Operator u = expm_propagator(pauli_z(), std::numbers::pi);
    CHECK(max_abs(u.mat + Matrix::Identity(2, 2)) < 1e-14);

    HilbertSpace h6({{"s", 6}});
    Operator h(h6, random_hermitian(6, 42));
    const double dt1 = 0.37, dt2 = 1.21;
    Matrix lhs = (expm_propagator(h, dt1) * expm_propagator(h, dt2)).mat;
    Matrix rhs = expm_propagator(h, dt1 + dt2).mat;
    CHECK(max_abs(lhs - rhs) < 1e-10);
    CHECK(unitarity_defect(rhs) < 1e-13);

    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(expm_propagator(Operator(q, bad), 0.1), NonHermitianError);
}

TEST_CASE("expm_general agrees with the Hermitian path and handles nilpotents") {
    HilbertSpace h5({{"s", 5}});
    Operator h(h5, random_hermitian(5, 3));
    Matrix via_series = expm_general(Complex(0, -0.83) * h.mat);
    Matrix via_eigen = expm_propagator(h, 0.83).mat;
    CHECK(max_abs(via_series - via_eigen) < 1e-13);

    Matrix nil = Matrix::Zero(2, 2);
    nil(0, 1) = 1.0;
    Matrix e = expm_general(nil);
    CHECK(std::abs(e(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(e(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(e(1, 0)) < 1e-15);
    CHECK(std::abs(e(1, 1) - 1.0) < 1e-15);
}

TEST_CASE("propagate_td: constant Hamiltonian reduction") {
    HilbertSpace h4({{"s", 4}});
    Matrix hm = random_hermitian(4, 11);
    TimeOperator h(h4, [hm](double) { return hm; });
    Matrix direct = expm_propagator(Operator(h4, hm), 1.9).mat;
    Matrix stepped = propagate_td(h, 0.0, 1.9, 100).mat;
    CHECK(max_abs(direct - stepped) < 1e-8);
    CHECK(unitarity_defect(stepped) < 1e-10);
}

TEST_CASE("propagate_td: commuting family equals midpoint quadrature exactly") {
    HilbertSpace q = qubit_space();
    Matrix z = pauli_z().mat;
    auto f = [](double t) { return std::sin(t) + 0.25 * t; };
    TimeOperator h(q, [&, z](double t) { return Matrix(f(t) * z); });

    const double t1 = 2.3;
    const int steps = 57;
    const double dt = t1 / steps;
    double quad = 0.0;
    for (int k = 0; k < steps; ++k) quad += f((k + 0.5) * dt) * dt;

    Matrix stepped = propagate_td(h, 0.0, t1, steps).mat;
    Matrix expected = expm_propagator(Operator(q, Matrix(quad * z)), 1.0).mat;
    CHECK(max_abs(stepped - expected) < 1e-13);

    // and approaches the exact integral at second order
    const double exact = (1.0 - std::cos(t1)) + 0.125 * t1 * t1;
    Matrix limit = expm_propagator(Operator(q, Matrix(exact * z)), 1.0).mat;
    CHECK(max_abs(stepped - limit) < 5e-4);
    CHECK(max_abs(propagate_td(h, 0.0, t1, 4 * steps).mat - limit) <
          max_abs(stepped - limit) / 10.0);
}

TEST_CASE("propagate_td: Richardson convergence, order two") {
    HilbertSpace h3({{"s", 3}});
    Matrix a = random_hermitian(3, 5), b = random_hermitian(3, 6);
    TimeOperator h(h3, [a, b](double t) { return Matrix(std::cos(2 * t) * a + std::sin(t) * b); });

    Matrix u1 = propagate_td(h, 0.0, 2.0, 40).mat;
    Matrix u2 = propagate_td(h, 0.0, 2.0, 80).mat;
    Matrix u4 = propagate_td(h, 0.0, 2.0, 160).mat;
    Matrix extrap = u4 + (u4 - u2) / 3.0;  // Richardson limit estimate
    const double d1 = (u1 - extrap).norm();
    const double d2 = (u2 - extrap).norm();
    const double d4 = (u4 - extrap).norm();
    CHECK(d1 / d2 >= 3.5);
    CHECK(d2 / d4 >= 3.5);

    CHECK_THROWS_AS(propagate_td(h, 1.0, 0.5, 10), SimulationError);
    CHECK_THROWS_AS(propagate_td(h, 0.0, 1.0, 0), SimulationError);

    TimeOperator bad(h3, [a](double) {
        Matrix m = a;
        m(0, 1) += 0.5;
        return m;
    });
    CHECK_THROWS_AS(propagate_td(bad, 0.0, 1.0, 3), NonHermitianError);
}

TEST_CASE("propagate_td_converged reports the doubling history") {
    HilbertSpace h3({{"s", 3}});
    Matrix a = random_hermitian(3, 9), b = random_hermitian(3, 10);
    TimeOperator h(h3, [a, b](double t) { return Matrix(std::cos(t) * a + t * b); });
    auto [u, rep] = propagate_td_converged(h, 0.0, 1.5, 40, 1e-8);
    CHECK(rep.converged);
    CHECK(rep.doubling_delta < 1e-8);
    CHECK(rep.steps >= 160);
    CHECK(rep.richardson_ratio > 3.0);
    CHECK(unitarity_defect(u.mat) < 1e-10);
}

TEST_CASE("phased midpoint product matches the naive loop") {
    HilbertSpace h4({{"s", 4}});
    Operator k(h4, random_hermitian(4, 21));
    Operator hg(h4, random_hermitian(4, 22));
    // h(t) = e^{+i k t} h_g e^{-i k t}
    Matrix km = k.mat, hm = hg.mat;
    TimeOperator h(h4, [km, hm](double t) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(km);
        Vector ph(es.eigenvalues().size());
        for (Eigen::Index i = 0; i < ph.size(); ++i)
            ph(i) = std::exp(Complex(0.0, es.eigenvalues()(i) * t));
        Matrix xk = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        return Matrix(xk * hm * xk.adjoint());
    });
    for (int steps : {1, 2, 7, 16, 33}) {
        Matrix fast = midpoint_product_phased(k, hg, 0.0, 1.8, steps).mat;
        Matrix naive = propagate_td(h, 0.0, 1.8, steps).mat;
        CHECK(max_abs(fast - naive) < 1e-12);
    }
}

TEST_CASE("norm preservation under unitaries") {
    HilbertSpace h6({{"s", 6}});
    Operator h(h6, random_hermitian(6, 33));
    Operator u = expm_propagator(h, 0.9);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> dist;
    Vector v(6);
    for (int i = 0; i < 6; ++i) v(i) = Complex(dist(rng), dist(rng));
    v.normalize();
    Ket k(h6, v);
    CHECK(std::abs((u * k).norm() - 1.0) < 1e-10);
}

TEST_CASE("low-Fock column selection") {
    HilbertSpace s({{"atom1", 3}, {"c", 5}});
    auto cols = low_fock_columns(s, 2);
    CHECK(cols.size() == 9);  // 3 atomic levels x Fock {0,1,2}
    for (int c : cols) CHECK(s.level_of(c, 1) <= 2);
}
