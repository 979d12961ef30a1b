#include <gtest/gtest.h>

#include <oslab/qtorus.hpp>

#include <numbers>
#include <random>

#include "oracles.hpp"

using namespace oslab;

namespace {

const std::vector<int> e1{1, 0};
const std::vector<int> e2{0, 1};

cplx turn(double x) { return std::polar(1.0, 2 * std::numbers::pi * x); }

// Clock and shift q x q matrices with C S = exp(2 pi i k/q) S C: a finite
// dimensional representation of the d = 2 relations at theta12 = k/q.
struct ClockShift {
    int q;
    Eigen::MatrixXcd clock, shift;

    ClockShift(int k, int q_) : q(q_), clock(Eigen::MatrixXcd::Zero(q_, q_)), shift(Eigen::MatrixXcd::Zero(q_, q_))
    {
        for (int i = 0; i < q; ++i) {
            clock(i, i) = turn(double(k) * i / q);
            shift((i + 1) % q, i) = 1.0;
        }
    }

    Eigen::MatrixXcd power(const Eigen::MatrixXcd& m, int e) const
    {
        Eigen::MatrixXcd base = e >= 0 ? m : Eigen::MatrixXcd(m.adjoint());
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(q, q);
        for (int i = 0; i < std::abs(e); ++i)
            out = out * base;
        return out;
    }

    // U^n = U_1^{n_1} U_2^{n_2}
    Eigen::MatrixXcd mono(std::span<const int> n) const { return power(clock, n[0]) * power(shift, n[1]); }

    Eigen::MatrixXcd rep(const TorusElement& a) const
    {
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(q, q);
        for (std::size_t i = 0; i < a.grid()->size(); ++i)
            out += a.coeffs()[Eigen::Index(i)] * mono(a.grid()->point(i));
        return out;
    }
};

} // namespace

TEST(Theta, SkewFromUpper)
{
    const auto th = ThetaMatrix::from_upper(3, {0.1, 0.2, 0.3});
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            EXPECT_EQ(th(j, k), -th(k, j));
    EXPECT_EQ(th(1, 2), 0.3);
    EXPECT_EQ(th.upper(), (std::vector<double>{0.1, 0.2, 0.3}));
    EXPECT_THROW(ThetaMatrix::from_upper(3, {0.1}), Error);
}

TEST(Grid, OrderingAndSize)
{
    const auto g = make_grid(2, 3);
    EXPECT_EQ(g->size(), 49u);
    EXPECT_EQ(g->norm2(0), 0);
    for (std::size_t i = 1; i < g->size(); ++i) {
        EXPECT_LE(g->norm2(i - 1), g->norm2(i));
        if (g->norm2(i - 1) == g->norm2(i)) {
            const auto a = g->point(i - 1);
            const auto b = g->point(i);
            EXPECT_TRUE(std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()));
        }
        EXPECT_EQ(*g->index_of(g->point(i)), i);
    }
    const auto g1 = make_grid(1, 2);
    EXPECT_EQ(g1->point(1)[0], -1);
    EXPECT_EQ(g1->point(2)[0], 1);
    EXPECT_THROW(make_grid(5, 1), Error);
    EXPECT_NO_THROW(make_grid(5, 1, 5));
}

TEST(Phase, Examples)
{
    const auto th = ThetaMatrix::from_upper(2, {0.25});
    EXPECT_EQ(twisted_phase(e1, e2, th), 0.0);
    EXPECT_EQ(twisted_phase(e2, e1, th), -0.25);
    const auto zero = ThetaMatrix::zero(3);
    EXPECT_EQ(twisted_phase(std::vector<int>{1, -2, 3}, std::vector<int>{4, 5, -6}, zero), 0.0);
}

TEST(Multiply, CommutativeMatchesConvolution)
{
    auto g = make_grid(2, 2);
    const auto th = ThetaMatrix::zero(2);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_element(g, th, rng);
        const auto b = random_element(g, th, rng);
        oracle::Coeffs ca, cb;
        for (std::size_t i = 0; i < g->size(); ++i) {
            const auto p = g->point(i);
            ca[{p.begin(), p.end()}] = a.coeffs()[Eigen::Index(i)];
            cb[{p.begin(), p.end()}] = b.coeffs()[Eigen::Index(i)];
        }
        const auto want = oracle::convolve(ca, cb, 2);
        const auto got = multiply(a, b);
        for (const auto& [n, v] : want)
            EXPECT_LT(std::abs(got.coeff(n) - v), 1e-13);
        EXPECT_LT((got.coeffs() - multiply(b, a).coeffs()).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_GT(got.dropped_mass(), 0.0);
    }
}

TEST(Multiply, GeneratorOrder)
{
    auto g = make_grid(2, 2);
    const auto th = ThetaMatrix::from_upper(2, {0.3});
    const auto u1 = TorusElement::monomial(g, th, e1);
    const auto u2 = TorusElement::monomial(g, th, e2);
    const std::vector<int> both{1, 1};
    const auto ab = multiply(u1, u2);
    const auto ba = multiply(u2, u1);
    EXPECT_LT(std::abs(ab.coeff(both) - 1.0), 1e-15);
    EXPECT_LT(std::abs(ba.coeff(both) - turn(-0.3)), 1e-15);
    EXPECT_LT(std::abs(ab.coeffs().squaredNorm() - 1.0), 1e-15);
}

TEST(Multiply, DefiningRelationAllPairs)
{
    auto g = make_grid(3, 1);
    const auto th = ThetaMatrix::from_upper(3, {0.1, 0.37, -0.21});
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
            std::vector<int> nj(3, 0), nk(3, 0);
            nj[std::size_t(j)] = 1;
            nk[std::size_t(k)] = 1;
            const auto uj = TorusElement::monomial(g, th, nj);
            const auto uk = TorusElement::monomial(g, th, nk);
            const auto lhs = multiply(uj, uk);
            const auto rhs = multiply(uk, uj).scaled(turn(th(j, k)));
            EXPECT_LT((lhs.coeffs() - rhs.coeffs()).cwiseAbs().maxCoeff(), 1e-14);
        }
}

TEST(Multiply, UnitIsExact)
{
    auto g = make_grid(2, 3);
    const auto th = ThetaMatrix::from_upper(2, {0.41});
    std::mt19937_64 rng(4);
    const auto b = random_element(g, th, rng);
    const auto one = TorusElement::unit(g, th);
    EXPECT_EQ(multiply(one, b).coeffs(), b.coeffs());
    EXPECT_EQ(multiply(b, one).coeffs(), b.coeffs());
}

TEST(Multiply, GridMismatch)
{
    const auto th = ThetaMatrix::zero(2);
    const auto a = TorusElement::unit(make_grid(2, 1), th);
    const auto b = TorusElement::unit(make_grid(2, 2), th);
    EXPECT_THROW(multiply(a, b), Error);
}

TEST(Multiply, AgreesWithClockShift)
{
    // theta12 = 2/7 and elements of support <= 1 on R = 3 so nothing is dropped.
    const ClockShift cs(2, 7);
    auto g = make_grid(2, 3);
    const auto th = ThetaMatrix::from_upper(2, {2.0 / 7.0});
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_element(g, th, rng, 1);
        const auto b = random_element(g, th, rng, 1);
        const auto ab = multiply(a, b);
        EXPECT_EQ(ab.dropped_mass(), 0.0);
        EXPECT_LT((cs.rep(ab) - cs.rep(a) * cs.rep(b)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((cs.rep(adjoint(a)) - cs.rep(a).adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Multiply, Associative)
{
    auto g = make_grid(2, 2);
    const auto th = ThetaMatrix::from_upper(2, {0.173});
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_element(g, th, rng, 1);
        const auto b = random_element(g, th, rng, 1);
        const auto c = random_element(g, th, rng, 1);
        const auto lhs = multiply(multiply(a, b), c);
        const auto rhs = multiply(a, multiply(b, c));
        EXPECT_LT((lhs.coeffs() - rhs.coeffs()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Adjoint, Examples)
{
    auto g = make_grid(2, 2);
    const auto th = ThetaMatrix::zero(2);
    const auto one = TorusElement::unit(g, th);
    EXPECT_EQ(adjoint(one).coeffs(), one.coeffs());
    const std::vector<int> n{1, -2};
    const std::vector<int> neg{-1, 2};
    const auto a = TorusElement::monomial(g, th, n, cplx(0.3, 0.8));
    const auto s = adjoint(a);
    EXPECT_EQ(s.coeff(neg), cplx(0.3, -0.8));
    EXPECT_EQ(s.coeffs().cwiseAbs().sum(), std::abs(cplx(0.3, 0.8)));
}

TEST(Adjoint, InvolutionAndMatrixRelation)
{
    auto g = make_grid(2, 3);
    const auto th = ThetaMatrix::from_upper(2, {0.29});
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_element(g, th, rng);
        EXPECT_LT((adjoint(adjoint(a)).coeffs() - a.coeffs()).cwiseAbs().maxCoeff(), 1e-14);
        const auto inner = interior_indices(*g, 1);
        const Eigen::MatrixXcd lhs = submatrix(matrix_rep(adjoint(a)).entries, inner);
        const Eigen::MatrixXcd rhs = submatrix(matrix_rep(a).entries.adjoint(), inner);
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Trace, ExamplesAndParseval)
{
    auto g = make_grid(2, 3);
    const auto th = ThetaMatrix::from_upper(2, {0.61});
    EXPECT_EQ(trace(TorusElement::unit(g, th)), cplx(1.0));
    EXPECT_EQ(trace(TorusElement::monomial(g, th, e1)), cplx(0.0));
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_element(g, th, rng);
        double direct = 0.0;
        for (Eigen::Index i = 0; i < a.coeffs().size(); ++i)
            direct += std::norm(a.coeffs()[i]);
        const cplx t = trace(multiply(adjoint(a), a));
        EXPECT_NEAR(t.real(), direct, 1e-12 * direct);
        EXPECT_NEAR(t.imag(), 0.0, 1e-12 * direct);
        EXPECT_GE(t.real(), -1e-14);
    }
}

TEST(Trace, Tracial)
{
    auto g = make_grid(2, 3);
    const auto th = ThetaMatrix::from_upper(2, {0.77});
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_element(g, th, rng);
        const auto b = random_element(g, th, rng);
        EXPECT_LT(std::abs(trace(multiply(a, b)) - trace(multiply(b, a))), 1e-10);
    }
}

TEST(Laplace, Eigenvalues)
{
    const double four_pi2 = 4 * std::numbers::pi * std::numbers::pi;
    EXPECT_EQ(laplace_eigenvalue(std::vector<int>{0, 0}), 0.0);
    EXPECT_NEAR(laplace_eigenvalue(e1), 39.4784176, 1e-7);
    EXPECT_NEAR(laplace_eigenvalue(std::vector<int>{1, 1}), 78.9568352, 1e-7);
    EXPECT_NEAR(laplace_eigenvalue(std::vector<int>{2, -3, 1}), 14 * four_pi2, 1e-10);
}

TEST(Sobolev, Weights)
{
    EXPECT_EQ(sobolev_weight(std::vector<int>{0, 0}, 3.7), 1.0);
    EXPECT_EQ(sobolev_weight(std::vector<int>{3, 2}, 0.0), 1.0);
    EXPECT_NEAR(sobolev_weight(e1, 1.0), 6.3623, 1e-4);
    auto g = make_grid(2, 2);
    std::mt19937_64 rng(11);
    const auto a = random_element(g, ThetaMatrix::zero(2), rng);
    EXPECT_NEAR(sobolev_norm(a, 0.0), l2_norm(a), 1e-14);
}

TEST(MatrixRep, UnitIsIdentity)
{
    auto g = make_grid(2, 2);
    const auto th = ThetaMatrix::from_upper(2, {0.3});
    const auto m = matrix_rep(TorusElement::unit(g, th));
    EXPECT_EQ(m.entries, Eigen::MatrixXcd::Identity(25, 25));
}

TEST(MatrixRep, HandBuiltShift)
{
    // U^(0,1) on R = 1 with theta12 = 0.3 sends U^n to exp(-2 pi i 0.3 n_1) U^(n + e2).
    auto g = make_grid(2, 1);
    const auto th = ThetaMatrix::from_upper(2, {0.3});
    Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(9, 9);
    for (int x = -1; x <= 1; ++x)
        for (int y = -1; y < 1; ++y) {
            const auto col = *g->index_of(std::vector<int>{x, y});
            const auto row = *g->index_of(std::vector<int>{x, y + 1});
            want(Eigen::Index(row), Eigen::Index(col)) = turn(-0.3 * x);
        }
    const auto m = matrix_rep(TorusElement::monomial(g, th, e2));
    EXPECT_LT((m.entries - want).cwiseAbs().maxCoeff(), 1e-15);

    // U^(1,0) carries no phase in this convention.
    Eigen::MatrixXcd want1 = Eigen::MatrixXcd::Zero(9, 9);
    for (int x = -1; x < 1; ++x)
        for (int y = -1; y <= 1; ++y)
            want1(Eigen::Index(*g->index_of(std::vector<int>{x + 1, y})),
                  Eigen::Index(*g->index_of(std::vector<int>{x, y}))) = 1.0;
    EXPECT_LT((matrix_rep(TorusElement::monomial(g, th, e1)).entries - want1).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MatrixRep, HilbertSchmidtCount)
{
    // |M(a)|_HS^2 = sum_k |a_k|^2 #{n : n, n + k in grid}
    auto g = make_grid(2, 3);
    const auto th = ThetaMatrix::from_upper(2, {0.45});
    std::mt19937_64 rng(12);
    const auto a = random_element(g, th, rng);
    double want = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const auto k = g->point(i);
        double count = 1.0;
        for (int x : k)
            count *= double(2 * 3 + 1 - std::abs(x));
        want += std::norm(a.coeffs()[Eigen::Index(i)]) * count;
    }
    EXPECT_NEAR(matrix_rep(a).entries.squaredNorm(), want, 1e-10 * want);
}

TEST(MatrixRep, HomomorphismOnInterior)
{
    auto g = make_grid(2, 3);
    const auto th = ThetaMatrix::from_upper(2, {0.52});
    std::mt19937_64 rng(13);
    const auto inner = interior_indices(*g, 1);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_element(g, th, rng, 1);
        const auto b = random_element(g, th, rng, 1);
        const Eigen::MatrixXcd prod = matrix_rep(a).entries * matrix_rep(b).entries;
        const Eigen::MatrixXcd direct = matrix_rep(multiply(a, b)).entries;
        EXPECT_LT((submatrix(prod, inner) - submatrix(direct, inner)).norm(), 1e-10);
    }
}

TEST(MatrixRep, HermitianFlagChecked)
{
    auto g = make_grid(1, 1);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
    m(0, 1) = 1.0;
    EXPECT_THROW(MatrixRep(g, m, true), Error);
    EXPECT_NO_THROW(MatrixRep(g, m, false));
    EXPECT_THROW(MatrixRep(g, Eigen::MatrixXcd::Zero(4, 4)), Error);
}

TEST(Commutative, ThetaZeroMultiplyCommutes)
{
    auto g = make_grid(3, 1);
    const auto th = ThetaMatrix::zero(3);
    std::mt19937_64 rng(14);
    const auto a = random_element(g, th, rng);
    const auto b = random_element(g, th, rng);
    EXPECT_LT((multiply(a, b).coeffs() - multiply(b, a).coeffs()).cwiseAbs().maxCoeff(), 1e-13);
}
