#ifndef OSLAB_METRIC_HPP
#define OSLAB_METRIC_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "embed.hpp"
#include "error.hpp"
#include "qtorus.hpp"
#include "spectral.hpp"
#include "verdict.hpp"
#include "young.hpp"

namespace oslab {

// omega_n = 2 pi |n|, the eigenvalues of Delta^{1/2}.
inline double sqrt_laplace(const LatticeGrid& g, std::size_t i)
{
    return two_pi * std::sqrt(double(g.norm2(i)));
}

namespace detail {

inline bool is_monomial(const TorusElement& a)
{
    int nonzero = 0;
    for (Eigen::Index i = 0; i < a.coeffs().size(); ++i)
        nonzero += a.coeffs()[i] != cplx{};
    return nonzero <= 1;
}

} // namespace detail

// ||[Delta^{1/2}, a]|| compressed to the grid of radius R + pad (pad < 0 means
// pad = R). Commutator entries are M(a)[m, n] (omega_m - omega_n).
inline double lip_norm(const TorusElement& a, int pad = -1)
{
    const LatticeGrid& g = *a.grid();
    if (pad < 0)
        pad = g.radius();
    const auto wide = make_grid(g.dim(), g.radius() + pad);
    const MatrixRep m = matrix_rep(a.on_grid(wide), wide);
    MatrixXcd c = m.entries;
    for (Eigen::Index col = 0; col < c.cols(); ++col)
        for (Eigen::Index row = 0; row < c.rows(); ++row)
            if (c(row, col) != cplx{})
                c(row, col) *= sqrt_laplace(*wide, std::size_t(row)) -
                               sqrt_laplace(*wide, std::size_t(col));
    // A monomial commutator has at most one entry per row and column.
    if (detail::is_monomial(a))
        return c.cwiseAbs().maxCoeff();
    return operator_norm(c);
}

struct LipPool {
    std::vector<TorusElement> elements;
    std::vector<double> lip;      // L(a)
    std::vector<double> op_norm;  // ||M(a)|| on the grid
    std::vector<std::string> labels;

    std::size_t size() const { return elements.size(); }

    void add(TorusElement a, std::string label, int pad = -1)
    {
        if (trace(a) != cplx{})
            throw Error(ErrorCode::invalid_parameter, "pool elements must be trace-zero");
        const double l = lip_norm(a, pad);
        if (!(l > 0.0))
            throw Error(ErrorCode::invalid_parameter, "pool element has L(a) = 0");
        op_norm.push_back(operator_norm(matrix_rep(a).entries));
        lip.push_back(l);
        elements.push_back(std::move(a));
        labels.push_back(std::move(label));
    }
};

// Every mode U^n, n != 0, plus `random_count` seeded trace-zero elements with
// support radius <= 2.
inline LipPool default_pool(GridPtr grid, const ThetaMatrix& theta, std::size_t random_count,
                            std::uint64_t seed)
{
    LipPool pool;
    for (std::size_t i = 1; i < grid->size(); ++i) {
        std::string label = "U^(";
        const auto n = grid->point(i);
        for (std::size_t k = 0; k < n.size(); ++k)
            label += (k ? "," : "") + std::to_string(n[k]);
        pool.add(TorusElement::monomial(grid, theta, n), label + ")");
    }
    std::mt19937_64 rng(seed);
    const int support = std::min(2, grid->radius());
    for (std::size_t r = 0; r < random_count; ++r) {
        TorusElement a = random_element(grid, theta, rng, support);
        VectorXcd c = a.coeffs();
        c[0] = 0.0;
        pool.add(TorusElement(grid, theta, std::move(c)), "random#" + std::to_string(r));
    }
    return pool;
}

struct LipReport {
    double k_hat = 0.0;
    std::size_t pool_size = 0;
    std::size_t argmax = 0;
};

inline LipReport lip_constant_estimate(const LipPool& pool)
{
    if (pool.size() == 0)
        throw Error(ErrorCode::empty_pool, "Lip constant needs a nonempty pool");
    LipReport rep;
    rep.pool_size = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double ratio = pool.op_norm[i] / pool.lip[i];
        if (ratio > rep.k_hat) {
            rep.k_hat = ratio;
            rep.argmax = i;
        }
    }
    return rep;
}

// Hermitian, positive semidefinite, normalized trace Tr/|grid| = 1.
class DensityOperator {
public:
    explicit DensityOperator(MatrixRep m) : rep_(std::move(m))
    {
        const double defect = rep_.hermiticity_defect();
        if (defect > 1e-10)
            throw Error(ErrorCode::not_self_adjoint, "density is not hermitian");
        rep_.entries = 0.5 * (rep_.entries + rep_.entries.adjoint());
        rep_.hermitian = true;
        Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(rep_.entries, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10)
            throw Error(ErrorCode::not_psd, "density has a negative eigenvalue");
        const double tr = rep_.entries.trace().real() / double(rep_.grid->size());
        if (std::abs(tr - 1.0) > 1e-10)
            throw Error(ErrorCode::invalid_parameter,
                        "density normalized trace is " + detail::format_number(tr));
    }

    const MatrixRep& rep() const { return rep_; }
    const GridPtr& grid() const { return rep_.grid; }
    const MatrixXcd& matrix() const { return rep_.entries; }

private:
    MatrixRep rep_;
};

// G G^* rescaled to normalized trace one, G of the given rank.
template <typename Rng>
DensityOperator random_density(GridPtr grid, Rng& rng, Eigen::Index rank = -1)
{
    const auto n = Eigen::Index(grid->size());
    if (rank < 1 || rank > n)
        rank = n;
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXcd g(n, rank);
    for (Eigen::Index j = 0; j < rank; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            g(i, j) = cplx(re, im);
        }
    MatrixXcd rho = g * g.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    rho *= double(n) / rho.trace().real();
    return DensityOperator(MatrixRep(std::move(grid), std::move(rho)));
}

// Tr(M(a) X) / |grid|.
inline cplx normalized_pairing(const TorusElement& a, const MatrixXcd& x)
{
    const MatrixXcd m = matrix_rep(a).entries;
    return (m.transpose().cwiseProduct(x)).sum() / double(x.rows());
}

namespace detail {

// Coefficients of the element whose left multiplication best matches p in
// Frobenius norm, with the trace removed.
inline TorusElement element_projection(const MatrixXcd& p, GridPtr grid, const ThetaMatrix& theta)
{
    const LatticeGrid& g = *grid;
    VectorXcd c = VectorXcd::Zero(Eigen::Index(g.size()));
    std::vector<double> count(g.size(), 0.0);
    std::vector<int> diff(static_cast<std::size_t>(g.dim()));
    for (std::size_t col = 0; col < g.size(); ++col) {
        const auto n = g.point(col);
        for (std::size_t row = 0; row < g.size(); ++row) {
            const auto m = g.point(row);
            for (int k = 0; k < g.dim(); ++k)
                diff[std::size_t(k)] = m[k] - n[k];
            const auto idx = g.index_of(diff);
            if (!idx)
                continue;
            c[Eigen::Index(*idx)] += p(Eigen::Index(row), Eigen::Index(col)) *
                                     std::conj(phase_factor(twisted_phase(diff, n, theta)));
            count[*idx] += 1.0;
        }
    }
    for (std::size_t i = 0; i < g.size(); ++i)
        if (count[i] > 0.0)
            c[Eigen::Index(i)] /= count[i];
    c[0] = 0.0;
    return TorusElement(std::move(grid), theta, std::move(c));
}

// Candidates adapted to x = rho - sigma: the projection of the extreme
// eigenvector pair, and the pairing gradient conj(dTr(M(a)x)/da_k) / |k|.
inline std::vector<TorusElement> adapted_candidates(const MatrixXcd& x, GridPtr grid,
                                                    const ThetaMatrix& theta)
{
    std::vector<TorusElement> out;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(x);
    const auto n = x.rows();
    const VectorXcd vp = eig.eigenvectors().col(n - 1);
    const VectorXcd vm = eig.eigenvectors().col(0);
    const MatrixXcd p = vp * vp.adjoint() - vm * vm.adjoint();
    TorusElement proj = element_projection(p, grid, theta);
    if (proj.coeffs().norm() > 0.0)
        out.push_back(adjoint(proj));

    const LatticeGrid& g = *grid;
    VectorXcd grad = VectorXcd::Zero(n);
    std::vector<int> diff(static_cast<std::size_t>(g.dim()));
    for (std::size_t col = 0; col < g.size(); ++col) {
        const auto q = g.point(col);
        for (std::size_t row = 0; row < g.size(); ++row) {
            const auto m = g.point(row);
            for (int k = 0; k < g.dim(); ++k)
                diff[std::size_t(k)] = m[k] - q[k];
            const auto idx = g.index_of(diff);
            if (!idx || *idx == 0)
                continue;
            grad[Eigen::Index(*idx)] += phase_factor(twisted_phase(diff, q, theta)) *
                                        x(Eigen::Index(col), Eigen::Index(row));
        }
    }
    for (std::size_t i = 1; i < g.size(); ++i)
        grad[Eigen::Index(i)] = std::conj(grad[Eigen::Index(i)]) / std::sqrt(double(g.norm2(i)));
    if (grad.norm() > 1e-300)
        out.emplace_back(grid, theta, std::move(grad));
    return out;
}

} // namespace detail

struct CandidateChain {
    std::string label;
    double pairing = 0.0;  // |Tr(M(a) X)| / |grid|
    double lip = 0.0;      // L(a)
    double op_norm = 0.0;  // ||M(a)||
    double bound_s1 = 0.0; // ||M(a)|| ||X||_{S_1} / |grid|
    double bound_phi = 0.0;// ||M(a)|| c_Phi ||X||_{S_Phi} / |grid|
};

struct DistanceReport {
    double value = 0.0; // max pairing / L(a)
    std::size_t argmax = 0;
    std::vector<CandidateChain> candidates;
    LipPool adapted; // data-adapted candidates evaluated for this pair
};

inline void check_pair(const DensityOperator& rho, const DensityOperator& sigma)
{
    if (!(*rho.grid() == *sigma.grid()))
        throw Error(ErrorCode::grid_mismatch, "densities live on different grids");
}

// max over candidates of |tau(a (rho - sigma))| / L(a); each candidate gives a
// lower bound for d_L by homogeneity. Adapted candidates are built from both
// rho - sigma and sigma - rho so the value is symmetric.
inline DistanceReport spectral_distance_lower(const DensityOperator& rho,
                                              const DensityOperator& sigma, const LipPool& pool,
                                              const ThetaMatrix& theta, bool adapt = true)
{
    check_pair(rho, sigma);
    if (pool.size() == 0 && !adapt)
        throw Error(ErrorCode::empty_pool, "distance needs candidates");
    const MatrixXcd x = rho.matrix() - sigma.matrix();
    DistanceReport rep;
    if (adapt && x.cwiseAbs().maxCoeff() > 0.0) {
        for (const MatrixXcd& sx : {MatrixXcd(x), MatrixXcd(-x)})
            for (auto& a : detail::adapted_candidates(sx, rho.grid(), theta))
                rep.adapted.add(std::move(a), "adapted#" + std::to_string(rep.adapted.size()));
    }
    auto visit = [&](const LipPool& p) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            CandidateChain c;
            c.label = p.labels[i];
            c.pairing = std::abs(normalized_pairing(p.elements[i], x));
            c.lip = p.lip[i];
            c.op_norm = p.op_norm[i];
            const double ratio = c.pairing / c.lip;
            if (ratio > rep.value) {
                rep.value = ratio;
                rep.argmax = rep.candidates.size();
            }
            rep.candidates.push_back(std::move(c));
        }
    };
    visit(pool);
    visit(rep.adapted);
    return rep;
}

struct TransportReport {
    Verdict verdict;
    double distance_lower = 0.0;
    double k_hat = 0.0;             // over the pool and the adapted candidates
    double inclusion_constant = 0.0;
    double trace_norm = 0.0;        // ||rho - sigma||_{S_1}
    double orlicz_norm = 0.0;       // ||rho - sigma||_{S_Phi}
    double rhs = 0.0;               // ||rho - sigma||_{S_Phi} K_hat c_Phi
    std::size_t chain_failures = 0; // candidates whose chain broke
    double worst_chain_slack = 0.0; // min over links of (rhs_link - lhs_link)
    DistanceReport distance;
};

// d_L lower bound <= ||rho - sigma||_{S_Phi} K_hat c_Phi, with every
// candidate's chain |tau(aX)| <= ||a|| ||X||_1 / N <= ||a|| c_Phi ||X||_Phi / N
// checked term by term. K_hat stands in for the cb norm of the Lip-norm map.
inline TransportReport transport_check(const DensityOperator& rho, const DensityOperator& sigma,
                                       const YoungFunction& phi, const LipPool& pool,
                                       const ThetaMatrix& theta)
{
    TransportReport rep;
    rep.distance = spectral_distance_lower(rho, sigma, pool, theta);
    const MatrixXcd x = rho.matrix() - sigma.matrix();
    const SingularSpectrum mu = singular_values(x, true);
    rep.trace_norm = schatten_norm(mu, 1.0);
    rep.orlicz_norm = orlicz_schatten_norm(mu, phi);
    rep.inclusion_constant = inclusion_constant(phi, rho.grid()->size());
    const double n = double(rho.grid()->size());

    rep.k_hat = pool.size() ? lip_constant_estimate(pool).k_hat : 0.0;
    if (rep.distance.adapted.size())
        rep.k_hat = std::max(rep.k_hat, lip_constant_estimate(rep.distance.adapted).k_hat);

    rep.worst_chain_slack = std::numeric_limits<double>::infinity();
    for (auto& c : rep.distance.candidates) {
        c.bound_s1 = c.op_norm * rep.trace_norm / n;
        c.bound_phi = c.op_norm * rep.inclusion_constant * rep.orlicz_norm / n;
        const double s1 = c.bound_s1 - c.pairing;
        const double s2 = c.bound_phi - c.bound_s1;
        const double s3 = rep.k_hat * c.lip - c.op_norm;
        const double slack = std::min({s1, s2, s3 * rep.orlicz_norm});
        rep.worst_chain_slack = std::min(rep.worst_chain_slack, slack);
        if (s1 < -1e-8 || s2 < -1e-8 || s3 < -1e-8)
            ++rep.chain_failures;
    }
    if (rep.distance.candidates.empty())
        rep.worst_chain_slack = 0.0;
    rep.rhs = rep.orlicz_norm * rep.k_hat * rep.inclusion_constant;
    if (rep.chain_failures > 0) {
        const auto& c = rep.distance.candidates[rep.distance.argmax];
        rep.verdict = Fails{std::to_string(rep.chain_failures) + " candidate chains broke (best " +
                                c.label + ")",
                            rep.worst_chain_slack};
    } else {
        const auto label = rep.distance.candidates.empty()
                               ? std::string("no candidate")
                               : rep.distance.candidates[rep.distance.argmax].label;
        rep.verdict = check_le(rep.distance.value, rep.rhs, 1e-8,
                               "candidate " + label + " exceeds the bound");
    }
    rep.distance_lower = rep.distance.value;
    return rep;
}

} // namespace oslab

#endif // OSLAB_METRIC_HPP
