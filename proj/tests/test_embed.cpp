#include <gtest/gtest.h>

#include <oslab/embed.hpp>

#include <numbers>
#include <random>

using namespace oslab;

namespace {

VectorXcd random_vector(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> g(0.0, 1.0);
    VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = g(rng);
        const double im = g(rng);
        v[i] = cplx(re, im);
    }
    return v;
}

// max over eps in (phases-th roots of unity)^m, eps_0 = 1, of |sum eps_i x_i|.
double brute_weak_l1(const std::vector<VectorXcd>& xs, int phases)
{
    const std::size_t m = xs.size();
    std::vector<int> digit(m, 0);
    double best = 0.0;
    while (true) {
        VectorXcd sum = VectorXcd::Zero(xs.front().size());
        for (std::size_t i = 0; i < m; ++i)
            sum += std::polar(1.0, 2 * std::numbers::pi * digit[i] / phases) * xs[i];
        best = std::max(best, sum.norm());
        std::size_t k = 1;
        while (k < m && digit[k] == phases - 1)
            digit[k++] = 0;
        if (k == m)
            break;
        ++digit[k];
    }
    return best;
}

} // namespace

TEST(Factorization, ReconstructionIsIdentity)
{
    const auto g = make_grid(2, 5);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_vector(rng, Eigen::Index(g->size()));
        const auto y = factored_embedding(*g, x, 1.0);
        EXPECT_LE((y - x).cwiseAbs().maxCoeff(), 1e-12 * (1 + x.cwiseAbs().maxCoeff()));
    }
}

TEST(Factorization, IsometryPreservesSobolevNorm)
{
    auto g = make_grid(2, 4);
    std::mt19937_64 rng(2);
    const auto a = random_element(g, ThetaMatrix::zero(2), rng);
    const double s = 1.3;
    EXPECT_NEAR(sobolev_isometry(*g, a.coeffs(), s).norm(), sobolev_norm(a, s),
                1e-12 * sobolev_norm(a, s));
}

TEST(Factorization, ReportInvariants)
{
    const auto phi = YoungFunction::power_log(2.5, 0);
    const auto rep = factorize(make_grid(2, 4), 1.0, phi);
    EXPECT_TRUE(holds(rep.membership));
    EXPECT_EQ(rep.iso_norm, 1.0);
    EXPECT_LE(rep.reconstruction_error, 1e-12);
    EXPECT_NEAR(rep.pi2_exact, rep.symbol_l2, 1e-10);
    EXPECT_LE(rep.pi1_lower, rep.upper_bound + 1e-8);
    EXPECT_LE(rep.pi1_certified, rep.pi1_lower + 1e-15);
    EXPECT_NEAR(rep.upper_bound, rep.inclusion_constant * rep.ls_orlicz_norm, 1e-12);
    EXPECT_EQ(rep.families, 201u);
    // On Hilbert space pi_1 <= K_G pi_2 with the complex Grothendieck constant < 1.4050.
    EXPECT_LE(rep.pi1_certified, 1.4050 * rep.pi2_exact);
}

TEST(Factorization, EveryFamilyBelowBound)
{
    const auto g = make_grid(2, 4);
    const auto phi = YoungFunction::power_log(2.5, 0);
    const auto symbol = ls_symbol(*g, 1.0);
    const double bound = inclusion_constant(phi, g->size()) * luxemburg_norm(symbol, phi);
    const auto pool = random_families(g->size(), 200, 42);
    for (std::size_t f = 0; f < pool.size(); ++f)
        EXPECT_LE(pi_summing_lower(symbol, pool[f], 1.0, WeakMode::automatic, f).value, bound + 1e-8);
}

TEST(Factorization, NormStableAcrossRadii)
{
    const auto phi = YoungFunction::power_log(2.5, 0);
    const auto r6 = factorize(make_grid(2, 6), 1.0, phi, {20, 10, 42});
    const auto g8 = make_grid(2, 8);
    const double n8 = luxemburg_norm(ls_symbol(*g8, 1.0), phi);
    EXPECT_LE(std::abs(n8 / r6.ls_orlicz_norm - 1.0), 0.02);
    EXPECT_GE(n8, r6.ls_orlicz_norm);
    EXPECT_LE(n8, r6.ls_orlicz_norm_with_tail.upper);
    EXPECT_GE(r6.ls_orlicz_norm_with_tail.lower, r6.ls_orlicz_norm - 1e-12);
}

TEST(Factorization, DivergentCaseFails)
{
    try {
        factorize(make_grid(2, 4), 1.0, YoungFunction::power(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::membership_failed);
    }
}

TEST(InclusionConstant, PowerClosedForm)
{
    // max_k k Phi^{-1}(1/k) = n^{1 - 1/p} for Power(p).
    EXPECT_NEAR(inclusion_constant(YoungFunction::power(2), 81), 9.0, 1e-10);
    EXPECT_NEAR(inclusion_constant(YoungFunction::power(1), 81), 1.0, 1e-12);
}

TEST(InclusionConstant, AttainedByFlatDiagonals)
{
    const auto phi = YoungFunction::power_log(1.5, 1);
    const std::size_t n = 30;
    double best = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        const std::vector<double> flat(k, 1.0);
        best = std::max(best, double(k) / luxemburg_norm(flat, phi));
    }
    EXPECT_NEAR(inclusion_constant(phi, n), best, 1e-9 * best);
}

TEST(WeakNorm, OrthonormalP2)
{
    std::mt19937_64 rng(3);
    Eigen::MatrixXcd a(6, 6);
    for (Eigen::Index j = 0; j < 6; ++j)
        a.col(j) = random_vector(rng, 6);
    const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
    std::vector<VectorXcd> cols;
    for (Eigen::Index j = 0; j < 4; ++j)
        cols.push_back(q.col(j));
    const auto w = weak_lp_norm(VectorFamily(cols), 2);
    EXPECT_NEAR(w.value, 1.0, 1e-12);
    EXPECT_TRUE(w.exact);
}

TEST(WeakNorm, SingleVector)
{
    std::mt19937_64 rng(4);
    const auto x = random_vector(rng, 7);
    const VectorFamily fam({x});
    EXPECT_NEAR(weak_lp_norm(fam, 1).value, x.norm(), 1e-12);
    EXPECT_NEAR(weak_lp_norm(fam, 2).value, x.norm(), 1e-12);
}

TEST(WeakNorm, TwoRealVectors)
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 1);
    for (int trial = 0; trial < 10; ++trial) {
        VectorXcd x1(5), x2(5);
        for (Eigen::Index i = 0; i < 5; ++i) {
            x1[i] = g(rng);
            x2[i] = g(rng);
        }
        const double want = std::max((x1 + x2).norm(), (x1 - x2).norm());
        const auto w = weak_lp_norm(VectorFamily({x1, x2}), 1, WeakMode::exhaustive);
        EXPECT_NEAR(w.value, want, 1e-12);
        EXPECT_TRUE(w.exhaustive);
    }
}

TEST(WeakNorm, ExhaustiveMatchesBruteForce)
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<VectorXcd> xs;
        for (int i = 0; i < 4; ++i)
            xs.push_back(random_vector(rng, 4));
        const auto w = weak_lp_norm(VectorFamily(xs), 1, WeakMode::exhaustive);
        EXPECT_NEAR(w.value, brute_weak_l1(xs, 8), 1e-10 * w.value);
        // A much finer phase grid never beats the certified upper bound.
        EXPECT_LE(brute_weak_l1(xs, 48), w.certified_upper * (1 + 1e-12));
        // Sampling can only find values the exhaustive search also saw.
        const auto s = weak_lp_norm(VectorFamily(xs), 1, WeakMode::sampled, 8, 10, 9);
        EXPECT_LE(s.value, w.value * (1 + 1e-12));
    }
}

TEST(WeakNorm, FamilyTooLarge)
{
    std::mt19937_64 rng(7);
    std::vector<VectorXcd> xs;
    for (int i = 0; i < 11; ++i)
        xs.push_back(random_vector(rng, 3));
    try {
        weak_lp_norm(VectorFamily(xs), 1, WeakMode::exhaustive);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::family_too_large);
    }
    const auto w = weak_lp_norm(VectorFamily(xs), 1);
    EXPECT_FALSE(w.exhaustive);
    EXPECT_GT(w.value, 0.0);
}

TEST(Summing, DiagonalPi2IsHilbertSchmidt)
{
    const auto est = pi_summing_lower({1.0, 0.5}, VectorFamily::basis(2), 2);
    EXPECT_NEAR(est.value, std::sqrt(1.25), 1e-12);
    const auto sym = ls_symbol(*make_grid(2, 3), 0.7);
    double hs = 0;
    for (double x : sym)
        hs += x * x;
    EXPECT_NEAR(pi_summing_lower(sym, VectorFamily::basis(sym.size()), 2).value, std::sqrt(hs), 1e-10);
}

TEST(Summing, IdentityOneDim)
{
    EXPECT_NEAR(pi_summing_lower({1.0}, VectorFamily::basis(1), 1).value, 1.0, 1e-15);
}

TEST(CbNorm, ConstantInAmplification)
{
    auto g = make_grid(2, 3);
    std::mt19937_64 rng(8);
    const auto a = random_element(g, ThetaMatrix::from_upper(2, {0.31}), rng, 2);
    const auto m = matrix_rep(a).entries;
    const double base = operator_norm(m);
    EXPECT_NEAR(cb_amplification_norm(m, 1), base, 1e-12 * base);
    for (int k = 2; k <= 4; ++k)
        EXPECT_NEAR(cb_amplification_norm(m, k), base, 1e-10 * base);
}

TEST(CbNorm, LsControlledByOrliczNorm)
{
    auto g = make_grid(2, 4);
    const auto ls = ls_operator(g, 1.0);
    for (const auto& phi : {YoungFunction::power(2), YoungFunction::power_log(2.5, 0),
                            YoungFunction::power_log(1.5, 1)}) {
        const double cb = cb_amplification_norm(ls.entries, 3, true);
        EXPECT_LE(cb, orlicz_schatten_norm(ls, phi) * phi.inverse(1.0) * (1 + 1e-12));
    }
}

TEST(CbNorm, Caps)
{
    const Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(100, 100);
    EXPECT_THROW(cb_amplification_norm(m, 5), Error);
    try {
        cb_amplification_norm(m, 4, false, 300);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::cap_exceeded);
    }
}

TEST(Optimality, CriticalPowerDiverges)
{
    const auto scan = optimality_scan(2, 1.0, YoungFunction::power(2), {4, 8, 16, 32});
    EXPECT_EQ(scan.outcome, ScanOutcome::diverges);
    EXPECT_TRUE(fails(scan.membership));
    for (std::size_t i = 1; i < scan.rows.size(); ++i) {
        EXPECT_GT(scan.rows[i].norm, scan.rows[i - 1].norm);
        EXPECT_GT(scan.rows[i].relative_increase, 0.02);
    }
    // Truncated ||L_1||_{S_2}^2 = sum over the square of 1/(1 + 4 pi^2 |n|^2), a
    // direct lattice sum.
    for (const auto& row : scan.rows) {
        double sum = 0;
        for (int x = -row.radius; x <= row.radius; ++x)
            for (int y = -row.radius; y <= row.radius; ++y)
                sum += 1.0 / (1.0 + 4 * std::numbers::pi * std::numbers::pi * (x * x + y * y));
        EXPECT_NEAR(row.norm, std::sqrt(sum), 1e-10);
    }
}

TEST(Optimality, ConvergentPlateaus)
{
    const auto scan = optimality_scan(2, 1.0, YoungFunction::power_log(2.5, 0), {4, 8});
    EXPECT_EQ(scan.outcome, ScanOutcome::converges);
    EXPECT_LE(scan.rows.back().relative_increase, 0.02);
    const auto one_d = optimality_scan(1, 2.0, YoungFunction::power(1), {8, 16, 32});
    EXPECT_EQ(one_d.outcome, ScanOutcome::converges);
}

TEST(Optimality, AgreesWithMembership)
{
    for (int d : {1, 2})
        for (double s : {1.0, 2.0})
            for (const auto& phi : {YoungFunction::power(1), YoungFunction::power(2),
                                    YoungFunction::power_log(2.5, 0), YoungFunction::power_log(1.5, 1)}) {
                const auto scan = optimality_scan(d, s, phi, {16, 32, 64});
                if (scan.outcome == ScanOutcome::diverges) {
                    EXPECT_TRUE(fails(scan.membership)) << d << " " << s << " " << phi.descriptor();
                }
                if (scan.outcome == ScanOutcome::converges) {
                    EXPECT_TRUE(holds(scan.membership)) << d << " " << s << " " << phi.descriptor();
                }
            }
}

TEST(Optimality, RejectsBadRadii)
{
    EXPECT_THROW(optimality_scan(2, 1, YoungFunction::power(2), {}), Error);
    EXPECT_THROW(optimality_scan(2, 1, YoungFunction::power(2), {8, 4}), Error);
}
