#ifndef OSLAB_EMBED_HPP
#define OSLAB_EMBED_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
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

// Sobolev isometry W^{s,2} -> l2: x_n -> w_s(n) x_n.
inline VectorXcd sobolev_isometry(const LatticeGrid& g, const VectorXcd& x, double s)
{
    VectorXcd y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        y[i] = x[i] * std::pow(1.0 + laplace_eigenvalue_from_norm2(g.norm2(std::size_t(i))),
                               0.5 * s);
    return y;
}

inline VectorXcd apply_multiplier(const std::vector<double>& symbol, const VectorXcd& y)
{
    VectorXcd out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        out[i] = symbol[std::size_t(i)] * y[i];
    return out;
}

// Multiplier with symbol (1 + lambda_n)^{-s/2} after the isometry; composes
// to the identity on coefficients.
inline VectorXcd factored_embedding(const LatticeGrid& g, const VectorXcd& x, double s)
{
    return apply_multiplier(ls_symbol(g, s), sobolev_isometry(g, x, s));
}

// sup ||T||_{S_1} / ||T||_{S_Phi} over flat rank-k diagonals, k <= dim:
// k * Phi^{-1}(1/k).
inline double inclusion_constant(const YoungFunction& phi, std::size_t dim)
{
    double best = 0.0;
    for (std::size_t k = 1; k <= dim; ++k)
        best = std::max(best, double(k) * phi.inverse(1.0 / double(k)));
    return best;
}

class VectorFamily {
public:
    explicit VectorFamily(std::vector<VectorXcd> vectors) : vectors_(std::move(vectors))
    {
        if (vectors_.empty())
            throw Error(ErrorCode::invalid_parameter, "vector family must be nonempty");
        for (const auto& v : vectors_) {
            if (v.size() != vectors_.front().size())
                throw Error(ErrorCode::invalid_parameter, "family vectors differ in length");
            if (v.norm() == 0.0)
                throw Error(ErrorCode::invalid_parameter, "family vectors must be nonzero");
        }
    }

    static VectorFamily basis(std::size_t dim)
    {
        std::vector<VectorXcd> v;
        for (std::size_t i = 0; i < dim; ++i)
            v.push_back(VectorXcd::Unit(Eigen::Index(dim), Eigen::Index(i)));
        return VectorFamily(std::move(v));
    }

    const std::vector<VectorXcd>& vectors() const { return vectors_; }
    std::size_t size() const { return vectors_.size(); }
    Eigen::Index dim() const { return vectors_.front().size(); }

    MatrixXcd gram() const
    {
        const auto m = Eigen::Index(vectors_.size());
        MatrixXcd g(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                g(i, j) = vectors_[std::size_t(i)].dot(vectors_[std::size_t(j)]);
        return g;
    }

private:
    std::vector<VectorXcd> vectors_;
};

enum class WeakMode { automatic, exhaustive, sampled };

struct WeakNorm {
    double value = 0.0;
    bool exact = false;      // value is the true weak norm
    bool exhaustive = false; // every discretized phase pattern was tried
    // Certified upper bound on the true weak l1 norm (inf when unknown).
    double certified_upper = std::numeric_limits<double>::infinity();
};

namespace detail {

inline bool is_orthonormal(const MatrixXcd& gram)
{
    const auto m = gram.rows();
    return (gram - MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-12;
}

// max over eps in {phases}^m, eps_0 = 1, of eps^* G eps, by an odometer that
// updates G eps incrementally.
inline double max_phase_quadratic(const MatrixXcd& gram, int phases)
{
    const auto m = gram.rows();
    std::vector<cplx> roots(static_cast<std::size_t>(phases));
    for (int k = 0; k < phases; ++k)
        roots[std::size_t(k)] = std::polar(1.0, two_pi * k / phases);
    std::vector<int> digit(static_cast<std::size_t>(m), 0);
    VectorXcd eps = VectorXcd::Ones(m);
    VectorXcd g_eps = gram * eps;
    double q = eps.dot(g_eps).real();
    double best = q;
    auto change = [&](Eigen::Index k, cplx next) {
        const cplx delta = next - eps[k];
        q += 2.0 * std::real(std::conj(delta) * g_eps[k]) + std::norm(delta) * gram(k, k).real();
        g_eps += gram.col(k) * delta;
        eps[k] = next;
    };
    while (true) {
        Eigen::Index k = 1;
        while (k < m && digit[std::size_t(k)] == phases - 1) {
            digit[std::size_t(k)] = 0;
            change(k, roots[0]);
            ++k;
        }
        if (k >= m)
            break;
        ++digit[std::size_t(k)];
        change(k, roots[std::size_t(digit[std::size_t(k)])]);
        best = std::max(best, q);
    }
    return best;
}

// Random starts followed by coordinate ascent over discretized phases.
inline double sampled_phase_quadratic(const MatrixXcd& gram, int phases, std::uint64_t seed)
{
    const auto m = gram.rows();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, phases - 1);
    double best = 0.0;
    for (int start = 0; start < 64; ++start) {
        VectorXcd eps(m);
        for (Eigen::Index i = 0; i < m; ++i)
            eps[i] = std::polar(1.0, two_pi * pick(rng) / phases);
        bool improved = true;
        double q = eps.dot(gram * eps).real();
        while (improved) {
            improved = false;
            for (Eigen::Index k = 0; k < m; ++k) {
                const cplx keep = eps[k];
                for (int p = 0; p < phases; ++p) {
                    eps[k] = std::polar(1.0, two_pi * p / phases);
                    const double trial = eps.dot(gram * eps).real();
                    if (trial > q * (1.0 + 1e-14)) {
                        q = trial;
                        improved = true;
                        break;
                    }
                    eps[k] = keep;
                }
            }
        }
        best = std::max(best, q);
    }
    return best;
}

} // namespace detail

// (sup_{|phi| <= 1} sum_i |phi(x_i)|^p)^{1/p} on a Hilbert space.
// p = 2 is exact (top eigenvalue of the Gram matrix); p = 1 maximizes
// |sum eps_i x_i| over discretized unit phases eps_i.
inline WeakNorm weak_lp_norm(const VectorFamily& fam, double p, WeakMode mode = WeakMode::automatic,
                             int phases = 8, std::size_t exhaustive_limit = 10,
                             std::uint64_t seed = 0)
{
    const MatrixXcd gram = fam.gram();
    WeakNorm out;
    if (p == 2.0) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
        out.value = std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
        out.exact = true;
        out.certified_upper = out.value;
        return out;
    }
    if (p != 1.0)
        throw Error(ErrorCode::invalid_parameter, "weak norms implemented for p = 1 and p = 2");
    if (phases < 2)
        throw Error(ErrorCode::invalid_parameter, "need at least two phases");

    if (mode != WeakMode::sampled && detail::is_orthonormal(gram)) {
        // sup_phi sum |phi(e_i)| = sqrt(m) for orthonormal e_i.
        out.value = std::sqrt(double(fam.size()));
        out.exact = out.exhaustive = true;
        out.certified_upper = out.value;
        return out;
    }
    const bool small = fam.size() <= exhaustive_limit;
    if (mode == WeakMode::exhaustive && !small)
        throw Error(ErrorCode::family_too_large,
                    std::to_string(fam.size()) + " vectors exceed the exhaustive limit " +
                        std::to_string(exhaustive_limit));
    if (small && mode != WeakMode::sampled) {
        out.value = std::sqrt(std::max(0.0, detail::max_phase_quadratic(gram, phases)));
        out.exhaustive = true;
        out.certified_upper = out.value / std::cos(std::numbers::pi / phases);
    } else {
        out.value = std::sqrt(std::max(0.0, detail::sampled_phase_quadratic(gram, phases, seed)));
    }
    return out;
}

struct SummingEstimate {
    double value = 0.0;     // lower bound when the weak norm is exact, heuristic otherwise
    double certified = 0.0; // certified lower bound for pi_p (0 if none)
    WeakNorm weak;
};

// (sum ||T x_i||^p)^{1/p} / weak_p(x) for the diagonal multiplier T.
inline SummingEstimate pi_summing_lower(const std::vector<double>& symbol, const VectorFamily& fam,
                                        double p, WeakMode mode = WeakMode::automatic,
                                        std::uint64_t seed = 0)
{
    if (fam.dim() != Eigen::Index(symbol.size()))
        throw Error(ErrorCode::grid_mismatch, "family dimension differs from multiplier size");
    SummingEstimate est;
    est.weak = weak_lp_norm(fam, p, mode, 8, 10, seed);
    double strong = 0.0;
    for (const auto& x : fam.vectors())
        strong += std::pow(apply_multiplier(symbol, x).norm(), p);
    strong = std::pow(strong, 1.0 / p);
    est.value = strong / est.weak.value;
    if (std::isfinite(est.weak.certified_upper))
        est.certified = strong / est.weak.certified_upper;
    return est;
}

// ||A (x) I_k||_op, the norm of left multiplication on k-by-k matrices.
inline double cb_amplification_norm(const MatrixXcd& a, int k, bool hermitian = false,
                                    std::size_t cap = 4096)
{
    if (k < 1 || k > 4)
        throw Error(ErrorCode::invalid_parameter, "amplification order must lie in [1, 4]");
    if (std::size_t(a.rows()) * std::size_t(k) > cap)
        throw Error(ErrorCode::cap_exceeded, "amplified matrix exceeds cap " + std::to_string(cap));
    const Eigen::Index n = a.rows();
    const Eigen::Index c = a.cols();
    MatrixXcd amp = MatrixXcd::Zero(n * k, c * k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            if (a(i, j) != cplx{})
                for (int r = 0; r < k; ++r)
                    amp(i * k + r, j * k + r) = a(i, j);
    return operator_norm(amp, hermitian);
}

// Families of 2..6 vectors, half spread over all modes and half on the
// lowest modes; family i uses its own seeded stream.
inline std::vector<VectorFamily> random_families(std::size_t dim, std::size_t count,
                                                 std::uint64_t seed)
{
    std::vector<VectorFamily> out;
    for (std::size_t f = 0; f < count; ++f) {
        std::seed_seq seq{seed, std::uint64_t(f), std::uint64_t(0x6a09e667)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const std::size_t m = 2 + f % 5;
        const std::size_t support = f % 2 == 0 ? dim : std::min(dim, 2 * m);
        std::vector<VectorXcd> vecs;
        for (std::size_t i = 0; i < m; ++i) {
            VectorXcd v = VectorXcd::Zero(Eigen::Index(dim));
            for (std::size_t j = 0; j < support; ++j) {
                const double re = gauss(rng);
                const double im = gauss(rng);
                v[Eigen::Index(j)] = cplx(re, im);
            }
            vecs.push_back(std::move(v));
        }
        out.emplace_back(std::move(vecs));
    }
    return out;
}

struct FactorizationOptions {
    std::size_t families = 200;
    std::size_t reconstruction_trials = 100;
    std::uint64_t seed = 42;
};

struct FactorizationReport {
    int d = 0;
    int radius = 0;
    double s = 0.0;
    std::string phi;
    Verdict membership;
    double ls_orlicz_norm = 0.0;           // on the truncation
    Bracket ls_orlicz_norm_with_tail;      // inscribed ball plus envelope tail
    double iso_norm = 1.0;
    double inclusion_constant = 0.0;
    double pi2_exact = 0.0;
    double symbol_l2 = 0.0;
    double pi1_lower = 0.0;
    double pi1_certified = 0.0;
    double upper_bound = 0.0;
    double reconstruction_error = 0.0;
    std::size_t families = 0;
    std::string factorization_note;
};

inline Verdict ls_membership(const LatticeGrid& g, double s, const YoungFunction& phi)
{
    const SingularSpectrum spec = ls_spectrum(g, s);
    const std::size_t n_valid = valid_rank_count(g);
    std::span<const double> head(spec.values().data(), n_valid);
    return series_membership(*spec.tail(), phi, head);
}

inline FactorizationReport factorize(GridPtr grid, double s, const YoungFunction& phi,
                                     const FactorizationOptions& opt = {})
{
    const LatticeGrid& g = *grid;
    FactorizationReport rep;
    rep.d = g.dim();
    rep.radius = g.radius();
    rep.s = s;
    rep.phi = phi.descriptor();
    rep.factorization_note =
        "embedding realized as multiplier((1+lambda)^{-s/2}) after the isometry "
        "x -> (1+lambda)^{s/2} x, so the composition is the identity; T_s(x) = L_s x alone "
        "would return L_s x";

    const SingularSpectrum spec = ls_spectrum(g, s);
    const std::size_t n_valid = valid_rank_count(g);
    std::span<const double> head(spec.values().data(), n_valid);
    rep.membership = series_membership(*spec.tail(), phi, head);
    if (!holds(rep.membership)) {
        std::string why = verdict_name(rep.membership);
        if (const auto* f = std::get_if<Fails>(&rep.membership))
            why += ": " + f->witness;
        throw Error(ErrorCode::membership_failed,
                    "L_s not in S_Phi for s=" + detail::format_number(s) + ", d=" +
                        std::to_string(g.dim()) + ", " + rep.phi + " (" + why +
                        "); run the optimality scan");
    }

    rep.ls_orlicz_norm = luxemburg_norm(spec.values(), phi);
    rep.ls_orlicz_norm_with_tail = luxemburg_norm_with_tail(head, *spec.tail(), phi);
    rep.inclusion_constant = inclusion_constant(phi, g.size());
    rep.upper_bound = rep.inclusion_constant * rep.ls_orlicz_norm;

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t t = 0; t < opt.reconstruction_trials; ++t) {
        VectorXcd x(Eigen::Index(g.size()));
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            x[i] = cplx(re, im);
        }
        const VectorXcd back = factored_embedding(g, x, s);
        rep.reconstruction_error = std::max(
            rep.reconstruction_error, (back - x).cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff());
    }

    const std::vector<double>& symbol = spec.values();
    const VectorFamily basis = VectorFamily::basis(g.size());
    rep.pi2_exact = pi_summing_lower(symbol, basis, 2.0).value;
    double l2 = 0.0;
    for (double m : symbol)
        l2 += m * m;
    rep.symbol_l2 = std::sqrt(l2);

    const SummingEstimate from_basis = pi_summing_lower(symbol, basis, 1.0);
    rep.pi1_lower = from_basis.value;
    rep.pi1_certified = from_basis.certified;
    const auto pool = random_families(g.size(), opt.families, opt.seed);
    for (std::size_t f = 0; f < pool.size(); ++f) {
        const SummingEstimate e =
            pi_summing_lower(symbol, pool[f], 1.0, WeakMode::automatic, opt.seed + f);
        rep.pi1_lower = std::max(rep.pi1_lower, e.value);
        rep.pi1_certified = std::max(rep.pi1_certified, e.certified);
    }
    rep.families = pool.size() + 1;
    return rep;
}

enum class ScanOutcome { diverges, converges, inconclusive };

inline const char* scan_outcome_name(ScanOutcome o)
{
    switch (o) {
    case ScanOutcome::diverges: return "diverges";
    case ScanOutcome::converges: return "converges";
    case ScanOutcome::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct OptimalityRow {
    int radius = 0;
    double norm = 0.0;
    double relative_increase = 0.0; // versus the previous radius
};

struct OptimalityScan {
    int d = 0;
    double s = 0.0;
    std::string phi;
    std::vector<OptimalityRow> rows;
    Verdict membership; // tail certification at the largest radius
    ScanOutcome outcome = ScanOutcome::inconclusive;
    double plateau_tolerance = 0.02;
};

// Truncated ||L_s||_{S_Phi} over increasing radii. Diverges when every step
// grows by more than the plateau tolerance and the tail minorant certifies
// divergence; converges when the last step is within tolerance and the tail
// bound is finite.
inline OptimalityScan optimality_scan(int d, double s, const YoungFunction& phi,
                                      const std::vector<int>& radii, double plateau_tol = 0.02)
{
    if (radii.empty() || !std::is_sorted(radii.begin(), radii.end()) ||
        std::adjacent_find(radii.begin(), radii.end()) != radii.end())
        throw Error(ErrorCode::invalid_parameter, "radii must be nonempty and increasing");
    OptimalityScan scan;
    scan.d = d;
    scan.s = s;
    scan.phi = phi.descriptor();
    scan.plateau_tolerance = plateau_tol;
    for (int r : radii) {
        const auto g = make_grid(d, r);
        OptimalityRow row;
        row.radius = r;
        row.norm = luxemburg_norm(ls_symbol(*g, s), phi);
        if (!scan.rows.empty())
            row.relative_increase = row.norm / scan.rows.back().norm - 1.0;
        scan.rows.push_back(row);
    }
    scan.membership = ls_membership(*make_grid(d, radii.back()), s, phi);

    bool all_growing = scan.rows.size() >= 2;
    for (std::size_t i = 1; i < scan.rows.size(); ++i)
        all_growing = all_growing && scan.rows[i].relative_increase > plateau_tol;
    const bool settled =
        scan.rows.size() >= 2 && std::abs(scan.rows.back().relative_increase) <= plateau_tol;
    if (fails(scan.membership) && all_growing)
        scan.outcome = ScanOutcome::diverges;
    else if (holds(scan.membership) && settled)
        scan.outcome = ScanOutcome::converges;
    return scan;
}

} // namespace oslab

#endif // OSLAB_EMBED_HPP
