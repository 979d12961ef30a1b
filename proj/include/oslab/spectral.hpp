#ifndef OSLAB_SPECTRAL_HPP
#define OSLAB_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "error.hpp"
#include "qtorus.hpp"
#include "young.hpp"

namespace oslab {

// Nonincreasing nonnegative values with an optional dominating tail.
class SingularSpectrum {
public:
    SingularSpectrum() = default;

    explicit SingularSpectrum(std::vector<double> values, std::optional<TailEnvelope> tail = {})
        : values_(std::move(values)), tail_(std::move(tail))
    {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
                throw Error(ErrorCode::invalid_parameter, "singular values must be finite, >= 0");
            if (i > 0 && values_[i] > values_[i - 1])
                throw Error(ErrorCode::not_sorted, "singular values must be nonincreasing");
        }
        if (tail_)
            tail_->check_dominates(values_);
    }

    const std::vector<double>& values() const { return values_; }
    const std::optional<TailEnvelope>& tail() const { return tail_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double largest() const { return values_.empty() ? 0.0 : values_.front(); }

private:
    std::vector<double> values_;
    std::optional<TailEnvelope> tail_;
};

inline SingularSpectrum sorted_spectrum(std::vector<double> v)
{
    for (double& x : v)
        x = std::max(x, 0.0);
    std::sort(v.begin(), v.end(), std::greater<>());
    return SingularSpectrum(std::move(v));
}

// Dense SVD; hermitian input goes through the eigensolver instead.
inline SingularSpectrum singular_values(const MatrixXcd& a, bool hermitian = false)
{
    if (!a.allFinite())
        throw Error(ErrorCode::invalid_parameter, "matrix has non-finite entries");
    if (a.size() == 0)
        return {};
    std::vector<double> out;
    if (hermitian && a.rows() == a.cols()) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(a, Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success)
            throw Error(ErrorCode::no_convergence, "hermitian eigensolver failed");
        for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
            out.push_back(std::abs(eig.eigenvalues()[i]));
    } else {
        Eigen::BDCSVD<MatrixXcd> svd(a);
        if (svd.info() != Eigen::Success)
            throw Error(ErrorCode::no_convergence, "SVD failed to converge");
        const VectorXd& s = svd.singularValues();
        out.assign(s.data(), s.data() + s.size());
    }
    return sorted_spectrum(std::move(out));
}

inline SingularSpectrum singular_values(const MatrixRep& a)
{
    return singular_values(a.entries, a.hermitian);
}

inline double operator_norm(const MatrixXcd& a, bool hermitian = false)
{
    return singular_values(a, hermitian).largest();
}

inline double schatten_norm(const SingularSpectrum& mu, double p)
{
    if (!(p >= 1.0))
        throw Error(ErrorCode::invalid_parameter, "Schatten exponent must be >= 1");
    const double top = mu.largest();
    if (top == 0.0)
        return 0.0;
    double sum = 0.0;
    for (double x : mu.values())
        sum += std::pow(x / top, p);
    return top * std::pow(sum, 1.0 / p);
}

inline double orlicz_schatten_norm(const SingularSpectrum& mu, const YoungFunction& phi)
{
    return luxemburg_norm(mu.values(), phi);
}

inline double orlicz_schatten_norm(const MatrixXcd& a, const YoungFunction& phi,
                                   bool hermitian = false)
{
    return luxemburg_norm(singular_values(a, hermitian).values(), phi);
}

inline double orlicz_schatten_norm(const MatrixRep& a, const YoungFunction& phi)
{
    return orlicz_schatten_norm(a.entries, phi, a.hermitian);
}

// Largest lambda for which the ball {4 pi^2 |n|^2 <= lambda} fits in the grid.
inline double max_valid_lambda(const LatticeGrid& g)
{
    return laplace_eigenvalue_from_norm2(long(g.radius()) * g.radius());
}

// #{n in grid : 4 pi^2 |n|^2 <= lambda}
inline std::size_t counting_function(const LatticeGrid& g, double lambda)
{
    if (!(lambda >= 0.0))
        throw Error(ErrorCode::invalid_parameter, "lambda must be >= 0");
    if (lambda > max_valid_lambda(g) * (1.0 + 1e-12))
        throw Error(ErrorCode::truncation_too_small,
                    "ball for lambda=" + detail::format_number(lambda) + " exceeds grid radius " +
                        std::to_string(g.radius()));
    const double bound = lambda / (4.0 * std::numbers::pi * std::numbers::pi) * (1.0 + 1e-12);
    const auto& n2 = g.norms2();
    return std::size_t(std::upper_bound(n2.begin(), n2.end(), bound,
                                        [](double b, long v) { return b < double(v); }) -
                       n2.begin());
}

// Number of grid points inside the largest inscribed ball.
inline std::size_t valid_rank_count(const LatticeGrid& g)
{
    return counting_function(g, max_valid_lambda(g));
}

// Volume of the unit ball over (2 pi)^d.
inline double weyl_constant(int d)
{
    const double ball = std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
    return ball / std::pow(two_pi, d);
}

struct WeylFit {
    int d = 0;
    double c_hat = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double residual = 0.0;
};

// Least squares N(lambda) ~ C lambda^{d/2} on [0.1 lambda_max, lambda_max],
// sampled at 257 geometric points.
inline WeylFit weyl_fit(const LatticeGrid& g)
{
    if (g.radius() < 10)
        throw Error(ErrorCode::truncation_too_small, "Weyl fit needs R >= 10");
    WeylFit fit;
    fit.d = g.dim();
    fit.window_hi = max_valid_lambda(g);
    fit.window_lo = 0.1 * fit.window_hi;
    constexpr int samples = 257;
    double sxy = 0.0;
    double sxx = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double lambda =
            fit.window_lo * std::pow(fit.window_hi / fit.window_lo, double(i) / (samples - 1));
        const double x = std::pow(lambda, 0.5 * fit.d);
        sxy += x * double(counting_function(g, lambda));
        sxx += x * x;
    }
    fit.c_hat = sxy / sxx;

    // N(lambda) / lambda^{d/2} is extremal at the window ends and on either
    // side of each jump, so scanning those bounds it on the whole window.
    auto deviation = [&](double count, double lambda) {
        const double scale = fit.c_hat * std::pow(lambda, 0.5 * fit.d);
        fit.residual = std::max(fit.residual, std::abs(count - scale) / scale);
    };
    deviation(double(counting_function(g, fit.window_lo)), fit.window_lo);
    deviation(double(counting_function(g, fit.window_hi)), fit.window_hi);
    const auto& n2 = g.norms2();
    for (std::size_t i = 0; i < n2.size(); ++i) {
        if (i > 0 && n2[i] == n2[i - 1])
            continue;
        const double lambda = laplace_eigenvalue_from_norm2(n2[i]);
        if (lambda <= fit.window_lo || lambda > fit.window_hi)
            continue;
        std::size_t end = i;
        while (end < n2.size() && n2[end] == n2[i])
            ++end;
        deviation(double(i), lambda);
        deviation(double(end), lambda);
    }
    return fit;
}

// Weyl constant used for envelopes: fitted when the grid allows, exact otherwise.
inline double envelope_weyl_constant(const LatticeGrid& g)
{
    return g.radius() >= 10 ? weyl_fit(g).c_hat : weyl_constant(g.dim());
}

// Values (1 + lambda_n)^{-s/2} in grid order, which is already nonincreasing.
inline std::vector<double> ls_symbol(const LatticeGrid& g, double s)
{
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        v[i] = std::pow(1.0 + laplace_eigenvalue_from_norm2(g.norm2(i)), -0.5 * s);
    return v;
}

// Spectrum of (1 + Delta)^{-s/2} with tail envelope c n^{-s/d}, c >= C^{s/d}.
inline SingularSpectrum ls_spectrum(const LatticeGrid& g, double s)
{
    if (!(s > 0.0))
        throw Error(ErrorCode::invalid_parameter, "s must be > 0");
    std::vector<double> v = ls_symbol(g, s);
    const double r = s / g.dim();
    const double c = envelope_weyl_constant(g);
    std::optional<TailEnvelope> env;
    if (v.size() >= 2)
        env = TailEnvelope::fit(v, r, 2, std::pow(c, r));
    return SingularSpectrum(std::move(v), env);
}

inline MatrixRep diagonal_rep(GridPtr g, const std::vector<double>& diag)
{
    const auto n = Eigen::Index(g->size());
    MatrixXcd m = MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        m(i, i) = diag[std::size_t(i)];
    return MatrixRep(std::move(g), std::move(m), true);
}

inline MatrixRep ls_operator(GridPtr g, double s)
{
    const auto v = ls_symbol(*g, s);
    return diagonal_rep(std::move(g), v);
}

// max over ranks n of exp(-t lambda_(n)) / Phi^{-1}(n).
inline double heat_bound_factor(const LatticeGrid& g, double t, const YoungFunction& phi)
{
    if (!(t > 0.0))
        throw Error(ErrorCode::invalid_parameter, "t must be > 0");
    double best = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double lambda = laplace_eigenvalue_from_norm2(g.norm2(i));
        best = std::max(best, std::exp(-t * lambda) / phi.inverse(double(i + 1)));
    }
    return best;
}

} // namespace oslab

#endif // OSLAB_SPECTRAL_HPP
