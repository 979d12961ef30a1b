#include <gtest/gtest.h>

#include <oslab/young.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"

using namespace oslab;

namespace {

std::vector<double> random_sorted(std::mt19937_64& rng, std::size_t n, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(0.0, scale);
    std::vector<double> mu(n);
    for (auto& x : mu)
        x = u(rng);
    std::sort(mu.rbegin(), mu.rend());
    return mu;
}

std::vector<YoungFunction> catalog()
{
    return {YoungFunction::power(1),          YoungFunction::power(2),
            YoungFunction::power(2.5),        YoungFunction::power_log(1, 1),
            YoungFunction::power_log(1.5, 1), YoungFunction::power_log(2, 1),
            YoungFunction::power_log(2.5, 0)};
}

} // namespace

TEST(YoungEval, PowerClosedForm) { EXPECT_DOUBLE_EQ(YoungFunction::power(2).eval(3.0), 9.0); }

TEST(YoungEval, PowerLogMatchesFormula)
{
    const auto phi = YoungFunction::power_log(1, 1);
    EXPECT_NEAR(phi.eval(1.0), 1.3132616875, 1e-10);
    EXPECT_NEAR(phi.eval(1.0), oracle::power_log(1.0, 1, 1), 1e-15);
    const auto psi = YoungFunction::power_log(2.5, -0.3);
    for (double t : {1e-6, 0.1, 1.0, 7.5, 1e4})
        EXPECT_NEAR(psi.eval(t), oracle::power_log(t, 2.5, -0.3), 1e-13 * oracle::power_log(t, 2.5, -0.3));
}

TEST(YoungEval, ZeroAtZero)
{
    for (const auto& phi : catalog())
        EXPECT_EQ(phi.eval(0.0), 0.0);
    const auto mix = interpolate(YoungFunction::power(1), YoungFunction::power(3), 0.3);
    EXPECT_EQ(mix.eval(0.0), 0.0);
}

TEST(YoungEval, OverflowPastCap)
{
    const auto phi = YoungFunction::power(2, 100.0);
    EXPECT_NO_THROW(phi.eval(100.0));
    try {
        phi.eval(101.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::overflow_domain);
    }
    EXPECT_TRUE(std::isinf(phi.eval_saturating(101.0)));
}

TEST(YoungEval, InvalidParameters)
{
    EXPECT_THROW(YoungFunction::power(0.5), Error);
    EXPECT_THROW(YoungFunction::power_log(0.9, 1), Error);
    // t log(e+t)^alpha with very negative alpha is not convex near t = 0.
    EXPECT_THROW(YoungFunction::power_log(1, -5), Error);
    EXPECT_THROW(interpolate(YoungFunction::power(1), YoungFunction::power(2), 1.0), Error);
    EXPECT_THROW(interpolate(YoungFunction::power(1), YoungFunction::power(2), 0.0), Error);
}

TEST(YoungInverse, ClosedForms)
{
    const auto sq = YoungFunction::power(2);
    EXPECT_NEAR(sq.inverse(9.0), 3.0, 1e-12);
    EXPECT_NEAR(sq.inverse(1.0), 1.0, 1e-12);
    EXPECT_EQ(sq.inverse(0.0), 0.0);
    const auto pl = YoungFunction::power_log(2, 1);
    EXPECT_NEAR(pl.inverse(4.0 * std::log(std::numbers::e + 2.0)), 2.0, 1e-9);
}

TEST(YoungInverse, RoundTripOnGrid)
{
    for (const auto& phi : catalog())
        for (double y = 1e-8; y < 1e8; y *= 3.7) {
            const double t = phi.inverse(y);
            EXPECT_NEAR(phi.eval(t), y, 1e-9 * y) << phi.descriptor() << " y=" << y;
        }
}

TEST(YoungAxioms, CatalogPasses)
{
    for (const auto& phi : catalog()) {
        EXPECT_TRUE(phi.axioms().ok) << phi.descriptor() << ": " << phi.axioms().first_violation;
        EXPECT_FALSE(phi.non_convex());
    }
}

TEST(YoungInterpolate, PowerOneTwoGivesFourThirds)
{
    const auto mid = interpolate(YoungFunction::power(1), YoungFunction::power(2), 0.5);
    for (int i = 0; i < 20; ++i) {
        const double t = std::pow(10.0, -3.0 + 6.0 * i / 19.0);
        const double want = std::pow(t, 4.0 / 3.0);
        EXPECT_NEAR(mid.eval(t), want, 1e-6 * want) << "t=" << t;
    }
}

TEST(YoungInterpolate, SelfInterpolationIsIdentity)
{
    const auto sq = YoungFunction::power(2);
    for (double theta : {0.1, 0.5, 0.9}) {
        const auto mix = interpolate(sq, sq, theta);
        for (double t : {0.01, 0.3, 1.0, 4.0, 100.0})
            EXPECT_NEAR(mix.eval(t), t * t, 1e-9 * t * t);
    }
}

TEST(YoungInterpolate, InverseIsWeightedGeometricMean)
{
    const auto a = YoungFunction::power_log(1.5, 1);
    const auto b = YoungFunction::power(3);
    const double theta = 0.3;
    const auto mix = interpolate(a, b, theta);
    for (double t : {0.1, 1.0, 10.0}) {
        const double want = std::pow(a.inverse(t), 1 - theta) * std::pow(b.inverse(t), theta);
        EXPECT_NEAR(mix.inverse(t), want, 1e-9 * want);
    }
}

TEST(YoungInterpolate, SymmetricInArguments)
{
    const auto a = YoungFunction::power(1.2);
    const auto b = YoungFunction::power_log(2, 1);
    for (double theta : {0.2, 0.5, 0.7}) {
        const auto f = interpolate(a, b, theta);
        const auto g = interpolate(b, a, 1 - theta);
        for (double t : {1e-3, 0.5, 2.0, 50.0})
            EXPECT_NEAR(f.eval(t), g.eval(t), 1e-9 * f.eval(t));
    }
}

TEST(YoungParse, RoundTripsDescriptors)
{
    for (const char* text : {"power:p=2", "powerlog:p=2,alpha=1",
                             "interp:theta=0.5:(power:p=1)|(power:p=2)"}) {
        const auto phi = parse_young(text);
        EXPECT_EQ(phi.descriptor(), text);
    }
    EXPECT_THROW(parse_young("cubic:p=3"), Error);
    EXPECT_THROW(parse_young("power:p=two"), Error);
    EXPECT_THROW(parse_young("powerlog:p=2"), Error);
}

TEST(Luxemburg, ClosedForms)
{
    EXPECT_NEAR(luxemburg_norm(std::vector<double>{0.7}, YoungFunction::power(2)), 0.7, 1e-10);
    EXPECT_NEAR(luxemburg_norm(std::vector<double>{0.5, 0.25}, YoungFunction::power(1)), 0.75, 1e-10);
    EXPECT_NEAR(luxemburg_norm(std::vector<double>{1.0, 1.0}, YoungFunction::power(2)), std::sqrt(2.0),
                1e-10);
    EXPECT_EQ(luxemburg_norm(std::vector<double>{0.0, 0.0}, YoungFunction::power(2)), 0.0);
    EXPECT_EQ(luxemburg_norm(std::vector<double>{}, YoungFunction::power(2)), 0.0);
}

TEST(Luxemburg, RejectsUnsorted)
{
    try {
        luxemburg_norm(std::vector<double>{0.1, 0.5}, YoungFunction::power(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_sorted);
    }
}

TEST(Luxemburg, MatchesGridScanOracle)
{
    std::mt19937_64 rng(7);
    const auto phi = YoungFunction::power_log(2, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto mu = random_sorted(rng, 10, 3.0);
        const double got = luxemburg_norm(mu, phi);
        const double want =
            oracle::luxemburg_scan(mu, [](double t) { return oracle::power_log(t, 2, 1); });
        EXPECT_NEAR(got, want, 1e-6) << "trial " << trial;
    }
}

TEST(LuxemburgProperty, Homogeneity)
{
    std::mt19937_64 rng(11);
    for (const auto& phi : catalog())
        for (int trial = 0; trial < 10; ++trial) {
            const auto mu = random_sorted(rng, 12);
            const double c = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
            auto scaled = mu;
            for (auto& x : scaled)
                x *= c;
            const double base = luxemburg_norm(mu, phi);
            EXPECT_NEAR(luxemburg_norm(scaled, phi), c * base, 1e-10 * c * base);
        }
}

TEST(LuxemburgProperty, Monotone)
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 0.5);
    for (const auto& phi : catalog())
        for (int trial = 0; trial < 10; ++trial) {
            const auto mu = random_sorted(rng, 8);
            auto bigger = mu;
            for (auto& x : bigger)
                x += u(rng);
            std::sort(bigger.rbegin(), bigger.rend());
            EXPECT_LE(luxemburg_norm(mu, phi), luxemburg_norm(bigger, phi) + 1e-10);
        }
}

TEST(LuxemburgProperty, MassIsOneAtNorm)
{
    std::mt19937_64 rng(13);
    for (const auto& phi : catalog())
        for (int trial = 0; trial < 10; ++trial) {
            const auto mu = random_sorted(rng, 15, 10.0);
            const double lambda = luxemburg_norm(mu, phi);
            double mass = 0.0;
            for (double m : mu)
                mass += phi.eval(m / lambda);
            EXPECT_NEAR(mass, 1.0, 1e-9) << phi.descriptor();
        }
}

TEST(EnvelopeIntegral, PowerClosedForm)
{
    // int_{x0}^inf (c x^{-1})^2 dx = c^2 / x0
    const TailEnvelope env{0.8, 1.0, 1};
    const auto b = envelope_integral(YoungFunction::power(2), env, 5.0);
    EXPECT_NEAR(b.lower, 0.64 / 5.0, 1e-10);
    EXPECT_NEAR(b.upper, 0.64 / 5.0, 1e-10);
}

TEST(EnvelopeIntegral, BracketsPowerLogQuadrature)
{
    // Midpoint sum on a fine log grid as an independent estimate.
    const TailEnvelope env{2.0, 0.6, 1};
    const double x0 = 3.0;
    double ref = 0.0;
    const double h = 1e-3;
    for (double u = std::log(x0) + h / 2; u < 400.0; u += h)
        ref += oracle::power_log(2.0 * std::exp(-0.6 * u), 2.5, 1) * std::exp(u) * h;
    const auto b = envelope_integral(YoungFunction::power_log(2.5, 1), env, x0);
    EXPECT_LE(b.lower, ref * (1 + 1e-6));
    EXPECT_GE(b.upper, ref * (1 - 1e-6));
    EXPECT_NEAR(b.lower, ref, 1e-5 * ref);
}

namespace {

// mu_n = (n/C)^{-s/d} with C = 1/(4 pi): head of 200 exact terms, envelope tail.
Verdict critical_series(const YoungFunction& phi, double d = 2, double s = 1)
{
    const double c = 1.0 / (4 * std::numbers::pi);
    const double r = s / d;
    std::vector<double> head(200);
    for (std::size_t i = 0; i < head.size(); ++i)
        head[i] = std::pow(double(i + 1) / c, -r);
    const TailEnvelope env{std::pow(c, r), r, 1};
    return series_membership(env, phi, head);
}

} // namespace

TEST(SeriesMembership, ExampleVerdicts)
{
    EXPECT_TRUE(holds(critical_series(YoungFunction::power_log(2.5, 0))));
    EXPECT_TRUE(fails(critical_series(YoungFunction::power_log(1.5, 0))));
    EXPECT_TRUE(fails(critical_series(YoungFunction::power_log(2, 0))));
    EXPECT_TRUE(fails(critical_series(YoungFunction::power_log(2, 1))));
}

TEST(SeriesMembership, BracketContainsDirectSum)
{
    // Power(2.5) on n^{-1/2} terms: sum n^{-5/4}, compare against a long partial
    // sum plus the integral tail.
    const auto v = critical_series(YoungFunction::power_log(2.5, 0));
    ASSERT_TRUE(holds(v));
    const auto& h = std::get<Holds>(v);
    const double c = 1.0 / (4 * std::numbers::pi);
    double direct = 0.0;
    const long n_max = 2000000;
    for (long n = 1; n <= n_max; ++n)
        direct += std::pow(double(n) / c, -1.25);
    direct += std::pow(c, 1.25) * 4.0 * std::pow(double(n_max) + 0.5, -0.25);
    EXPECT_LE(h.lower, direct * (1 + 1e-6));
    EXPECT_GE(h.upper, direct * (1 - 1e-6));
}

TEST(SeriesMembership, CriticalPartialSumsGrowLogarithmically)
{
    // Terms of the p = d/s, alpha = 1 series behave like 2/n: doubling N adds a
    // constant, so the partial sums are unbounded.
    const double c = 1.0 / (4 * std::numbers::pi);
    auto partial = [&](long n_max) {
        double s = 0.0;
        for (long n = 1; n <= n_max; ++n)
            s += oracle::power_log(std::pow(double(n) / c, -0.5), 2, 1);
        return s;
    };
    const double a = partial(100000);
    const double b = partial(200000);
    const double inc = b - a;
    EXPECT_NEAR(inc, c * std::log(2.0), 1e-3);
}

TEST(LuxemburgTail, ContainsTruncatedNorm)
{
    const auto phi = YoungFunction::power(2);
    std::vector<double> head(50);
    for (std::size_t i = 0; i < head.size(); ++i)
        head[i] = 1.0 / double(i + 1);
    const TailEnvelope env{1.0, 1.0, 1};
    const auto b = luxemburg_norm_with_tail(head, env, phi);
    const double full = std::numbers::pi / std::sqrt(6.0);
    EXPECT_LE(b.lower, full + 1e-9);
    EXPECT_GE(b.upper, full - 1e-9);
    EXPECT_GE(b.lower, luxemburg_norm(head, phi) - 1e-12);
}
