#ifndef OSLAB_PDE_HPP
#define OSLAB_PDE_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "qtorus.hpp"
#include "spectral.hpp"
#include "verdict.hpp"
#include "young.hpp"

namespace oslab {

namespace detail {

inline MatrixXcd hermitian_part(const MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

inline double smallest_eigenvalue(const MatrixXcd& h)
{
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(h, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::no_convergence, "hermitian eigensolver failed");
    return eig.eigenvalues().minCoeff();
}

// M(V) on the grid, checked and symmetrized.
inline MatrixXcd potential_matrix(const TorusElement& v, GridPtr grid)
{
    const MatrixRep m = matrix_rep(v, std::move(grid));
    const double defect = m.hermiticity_defect();
    if (defect > 1e-10)
        throw Error(ErrorCode::not_self_adjoint,
                    "potential is not self-adjoint (defect " + format_number(defect) + ")");
    return hermitian_part(m.entries);
}

} // namespace detail

// L = Delta + V with the positive Laplacian, on a truncated grid.
class EllipticProblem {
public:
    EllipticProblem(TorusElement v, double s, YoungFunction phi, bool claim_nonnegative = true)
        : v_(std::move(v)), s_(s), phi_(std::move(phi)), nonnegative_(claim_nonnegative)
    {
        if (v_.dropped_mass() != 0.0)
            throw Error(ErrorCode::invalid_parameter, "potential carries dropped mass");
        potential_ = detail::potential_matrix(v_, v_.grid());
        vmin_ = detail::smallest_eigenvalue(potential_);
        if (nonnegative_ && vmin_ < -1e-10)
            throw Error(ErrorCode::not_psd, "potential has eigenvalue " +
                                                detail::format_number(vmin_) + " < 0");
    }

    const GridPtr& grid() const { return v_.grid(); }
    const ThetaMatrix& theta() const { return v_.theta(); }
    const TorusElement& potential() const { return v_; }
    const MatrixXcd& potential_matrix() const { return potential_; }
    double s() const { return s_; }
    const YoungFunction& phi() const { return phi_; }
    bool claims_nonnegative() const { return nonnegative_; }
    double potential_min() const { return vmin_; }

    // V = c 1 commutes with every function of Delta.
    bool scalar_potential() const
    {
        for (Eigen::Index i = 1; i < v_.coeffs().size(); ++i)
            if (v_.coeffs()[i] != cplx{})
                return false;
        return true;
    }

private:
    TorusElement v_;
    double s_;
    YoungFunction phi_;
    bool nonnegative_;
    MatrixXcd potential_;
    double vmin_ = 0.0;
};

inline MatrixRep assemble(const EllipticProblem& prob)
{
    MatrixXcd m = prob.potential_matrix();
    const VectorXd lap = laplace_diagonal(*prob.grid());
    for (Eigen::Index i = 0; i < lap.size(); ++i)
        m(i, i) += lap[i];
    return MatrixRep(prob.grid(), std::move(m), true);
}

struct GapReport {
    double lambda0 = 0.0;         // smallest eigenvalue at radius R
    double lambda0_doubled = 0.0; // same at radius 2R
    double vmin = 0.0;            // smallest eigenvalue of M(V)
    double trace_v = 0.0;         // tau(V)
    Verdict gap;                  // lambda0 > 0
};

inline GapReport spectral_gap(const EllipticProblem& prob)
{
    if (!prob.claims_nonnegative() && prob.potential_min() < -1e-10)
        throw Error(ErrorCode::not_psd, "spectral gap needs a nonnegative potential");
    GapReport rep;
    rep.vmin = prob.potential_min();
    rep.trace_v = trace(prob.potential()).real();
    rep.lambda0 = detail::smallest_eigenvalue(assemble(prob).entries);

    const LatticeGrid& g = *prob.grid();
    const auto wide = make_grid(g.dim(), std::max(1, 2 * g.radius()));
    const TorusElement v2 = prob.potential().on_grid(wide);
    MatrixXcd m2 = detail::potential_matrix(v2, wide);
    const VectorXd lap = laplace_diagonal(*wide);
    for (Eigen::Index i = 0; i < lap.size(); ++i)
        m2(i, i) += lap[i];
    rep.lambda0_doubled = detail::smallest_eigenvalue(m2);
    if (std::abs(rep.lambda0 - rep.lambda0_doubled) > 1e-6 * std::max(1.0, std::abs(rep.lambda0)))
        throw Error(ErrorCode::no_convergence,
                    "lambda0 unstable under doubling R: " + detail::format_number(rep.lambda0) +
                        " vs " + detail::format_number(rep.lambda0_doubled));
    if (rep.lambda0 > 1e-12)
        rep.gap = Holds{rep.lambda0, 0.0, rep.lambda0};
    else
        rep.gap = Fails{"lambda0 = " + detail::format_number(rep.lambda0), rep.lambda0};
    return rep;
}

inline TorusElement solve(const EllipticProblem& prob, const TorusElement& f)
{
    if (!(*f.grid() == *prob.grid()) || !(f.theta() == prob.theta()))
        throw Error(ErrorCode::grid_mismatch, "right-hand side lives on another grid");
    const MatrixRep op = assemble(prob);
    const double lmin = detail::smallest_eigenvalue(op.entries);
    if (!(lmin > 1e-12))
        throw Error(ErrorCode::singular_operator,
                    "operator is not positive definite (lambda0 = " + detail::format_number(lmin) +
                        ")");
    Eigen::LLT<MatrixXcd> llt(op.entries);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::singular_operator, "Cholesky factorization failed");
    VectorXcd u = llt.solve(f.coeffs());
    return TorusElement(f.grid(), f.theta(), std::move(u));
}

inline double residual_norm(const EllipticProblem& prob, const TorusElement& u,
                            const TorusElement& f)
{
    return (assemble(prob).entries * u.coeffs() - f.coeffs()).norm();
}

// (1 + Delta)^{s/2} applied coefficientwise.
inline TorusElement bessel_potential(const TorusElement& u, double s)
{
    const LatticeGrid& g = *u.grid();
    VectorXcd c = u.coeffs();
    for (std::size_t i = 0; i < g.size(); ++i)
        c[Eigen::Index(i)] *= std::pow(1.0 + laplace_eigenvalue_from_norm2(g.norm2(i)), 0.5 * s);
    return TorusElement(u.grid(), u.theta(), std::move(c));
}

struct RegularityResult {
    Verdict verdict;
    double u_norm = 0.0;  // ||M((1+Delta)^{s/2} u)||_{S_Phi}
    double f_norm = 0.0;  // ||M(f)||_{S_Phi}
    double lambda0 = 0.0;
    double residual = 0.0;
};

// ||u||_{W^{s,Phi}} <= ||f||_{S_Phi} / lambda0 for u = L^{-1} f.
inline RegularityResult regularity_check(const EllipticProblem& prob, const TorusElement& f,
                                         double lambda0)
{
    RegularityResult r;
    r.lambda0 = lambda0;
    const TorusElement u = solve(prob, f);
    r.residual = residual_norm(prob, u, f);
    r.u_norm = orlicz_schatten_norm(matrix_rep(bessel_potential(u, prob.s())).entries, prob.phi());
    r.f_norm = orlicz_schatten_norm(matrix_rep(f).entries, prob.phi());
    const double rhs = r.f_norm / lambda0;
    r.verdict = check_le(r.u_norm, rhs, 1e-10 * std::max(1.0, rhs),
                         "||u||=" + detail::format_number(r.u_norm) +
                             " > ||f||/lambda0=" + detail::format_number(rhs));
    return r;
}

inline RegularityResult regularity_check(const EllipticProblem& prob, const TorusElement& f)
{
    return regularity_check(prob, f, spectral_gap(prob).lambda0);
}

inline TorusElement heat_apply(double t, const TorusElement& x)
{
    if (!(t >= 0.0))
        throw Error(ErrorCode::invalid_parameter, "heat time must be >= 0");
    const LatticeGrid& g = *x.grid();
    VectorXcd c = x.coeffs();
    for (std::size_t i = 1; i < g.size(); ++i)
        c[Eigen::Index(i)] *= std::exp(-t * laplace_eigenvalue_from_norm2(g.norm2(i)));
    return TorusElement(x.grid(), x.theta(), std::move(c), x.dropped_mass());
}

inline MatrixRep heat_apply(double t, const MatrixRep& x)
{
    if (!(t >= 0.0))
        throw Error(ErrorCode::invalid_parameter, "heat time must be >= 0");
    const LatticeGrid& g = *x.grid;
    MatrixXcd m = x.entries;
    for (std::size_t i = 1; i < g.size(); ++i)
        m.row(Eigen::Index(i)) *= std::exp(-t * laplace_eigenvalue_from_norm2(g.norm2(i)));
    return MatrixRep(x.grid, std::move(m));
}

enum class TraceProfile { rank_one, flat, geometric };

inline const char* profile_name(TraceProfile p)
{
    switch (p) {
    case TraceProfile::rank_one: return "rank_one";
    case TraceProfile::flat: return "flat";
    case TraceProfile::geometric: return "geometric";
    }
    return "?";
}

namespace detail {

template <typename Rng>
MatrixXcd random_unitary(Eigen::Index n, Rng& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXcd z(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            z(i, j) = cplx(re, im);
        }
    Eigen::HouseholderQR<MatrixXcd> qr(z);
    MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(n, n);
    const MatrixXcd r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        const cplx d = r(j, j);
        if (std::abs(d) > 0.0)
            q.col(j) *= d / std::abs(d);
    }
    return q;
}

} // namespace detail

struct SmoothingTrial {
    TraceProfile profile = TraceProfile::rank_one;
    std::size_t rank = 0;
    double norm = 0.0;  // ||e^{-t Delta} T||_{S_Phi}
    double ratio = 0.0; // norm / heat_bound_factor
};

struct SmoothingReport {
    double t = 0.0;
    double bound = 0.0;
    double worst_ratio = 0.0;
    Verdict verdict;
    std::vector<SmoothingTrial> trials;
    std::vector<SmoothingTrial> flat_low_modes; // flat rank-k diagonals, k = 1..
};

// Random T with ||T||_{S_1} = 1 against sup_n e^{-t lambda_n}/Phi^{-1}(n).
inline SmoothingReport heat_smoothing_check(GridPtr grid, double t, const YoungFunction& phi,
                                            std::size_t trials, std::uint64_t seed)
{
    if (!(t > 0.0))
        throw Error(ErrorCode::invalid_parameter, "heat time must be > 0");
    const LatticeGrid& g = *grid;
    const auto n = Eigen::Index(g.size());
    SmoothingReport rep;
    rep.t = t;
    rep.bound = heat_bound_factor(g, t, phi);

    VectorXd decay(n);
    for (Eigen::Index i = 0; i < n; ++i)
        decay[i] = std::exp(-t * laplace_eigenvalue_from_norm2(g.norm2(std::size_t(i))));

    for (std::size_t k = 1; k <= std::min<std::size_t>(g.size(), 16); ++k) {
        std::vector<double> sv(k);
        for (std::size_t i = 0; i < k; ++i)
            sv[i] = decay[Eigen::Index(i)] / double(k);
        std::sort(sv.begin(), sv.end(), std::greater<>());
        SmoothingTrial row{TraceProfile::flat, k, luxemburg_norm(sv, phi), 0.0};
        row.ratio = row.norm / rep.bound;
        rep.flat_low_modes.push_back(row);
        rep.worst_ratio = std::max(rep.worst_ratio, row.ratio);
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick_rank(1, n);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const auto profile = TraceProfile(trial % 3);
        VectorXd sv = VectorXd::Zero(n);
        Eigen::Index rank = 1;
        if (profile == TraceProfile::rank_one) {
            sv[0] = 1.0;
        } else if (profile == TraceProfile::flat) {
            rank = pick_rank(rng);
            sv.head(rank).setConstant(1.0 / double(rank));
        } else {
            rank = n;
            std::uniform_real_distribution<double> q(0.3, 0.95);
            const double ratio = q(rng);
            for (Eigen::Index i = 0; i < n; ++i)
                sv[i] = std::pow(ratio, double(i));
            sv /= sv.sum();
        }
        // Left singular vectors biased toward low modes on half the trials.
        MatrixXcd u = detail::random_unitary(n, rng);
        if (trial % 2 == 1)
            u = MatrixXcd::Identity(n, n);
        const MatrixXcd w = detail::random_unitary(n, rng);
        const MatrixXcd tmat = u * sv.cast<cplx>().asDiagonal() * w.adjoint();
        const MatrixXcd smoothed = decay.cast<cplx>().asDiagonal() * tmat;
        SmoothingTrial row{profile, std::size_t(rank), orlicz_schatten_norm(smoothed, phi), 0.0};
        row.ratio = row.norm / rep.bound;
        rep.worst_ratio = std::max(rep.worst_ratio, row.ratio);
        rep.trials.push_back(row);
    }
    rep.verdict = check_le(rep.worst_ratio, 1.0, 1e-10,
                           "worst ratio " + detail::format_number(rep.worst_ratio));
    return rep;
}

struct HeatScalingRow {
    double t = 0.0;
    double value = 0.0;
};

struct HeatScalingFit {
    int d = 0;
    double p = 0.0;
    int radius = 0;
    double slope = 0.0;
    double classical = 0.0; // -d(1 - 1/p)/2
    std::vector<HeatScalingRow> rows;
};

// ||e^{-t Delta}||_{S_p} over a geometric t sweep, with the log-log slope.
// The radius is chosen so e^{-t lambda} is below 1e-16 at the grid edge for
// the smallest t.
inline HeatScalingFit heat_scaling_fit(int d, double p, double t_min, double t_max,
                                       int samples = 9)
{
    if (!(p >= 1.0) || !(t_min > 0.0) || !(t_max > t_min) || samples < 2)
        throw Error(ErrorCode::invalid_parameter, "bad heat scaling parameters");
    HeatScalingFit fit;
    fit.d = d;
    fit.p = p;
    fit.classical = -0.5 * d * (1.0 - 1.0 / p);
    fit.radius = int(std::ceil(std::sqrt(37.0 / (t_min * 4.0 * std::numbers::pi *
                                                 std::numbers::pi))));
    const auto grid = make_grid(d, fit.radius);
    const YoungFunction phi = YoungFunction::power(p);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = t_min * std::pow(t_max / t_min, double(i) / (samples - 1));
        std::vector<double> sv(grid->size());
        for (std::size_t k = 0; k < grid->size(); ++k)
            sv[k] = std::exp(-t * laplace_eigenvalue_from_norm2(grid->norm2(k)));
        const double value = luxemburg_norm(sv, phi);
        fit.rows.push_back({t, value});
        const double x = std::log(t);
        const double y = std::log(value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.slope = (samples * sxy - sx * sy) / (samples * sxx - sx * sx);
    return fit;
}

} // namespace oslab

#endif // OSLAB_PDE_HPP
