#ifndef OSLAB_QTORUS_HPP
#define OSLAB_QTORUS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace oslab {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Real skew-symmetric deformation matrix, built from its strict upper
// triangle listed row by row: (0,1), (0,2), ..., (1,2), ...
class ThetaMatrix {
public:
    ThetaMatrix() = default;

    static ThetaMatrix zero(int d) { return from_upper(d, std::vector<double>(d * (d - 1) / 2)); }

    static ThetaMatrix from_upper(int d, const std::vector<double>& upper)
    {
        if (d < 1)
            throw Error(ErrorCode::invalid_parameter, "dimension must be >= 1");
        if (upper.size() != std::size_t(d * (d - 1) / 2))
            throw Error(ErrorCode::invalid_parameter,
                        "theta needs " + std::to_string(d * (d - 1) / 2) + " upper entries");
        ThetaMatrix th;
        th.d_ = d;
        th.entries_.assign(std::size_t(d * d), 0.0);
        std::size_t idx = 0;
        for (int j = 0; j < d; ++j) {
            for (int k = j + 1; k < d; ++k) {
                if (!std::isfinite(upper[idx]))
                    throw Error(ErrorCode::invalid_parameter, "theta entries must be finite");
                th.entries_[j * d + k] = upper[idx];
                th.entries_[k * d + j] = -upper[idx];
                ++idx;
            }
        }
        return th;
    }

    int dim() const { return d_; }
    double operator()(int j, int k) const { return entries_[std::size_t(j * d_ + k)]; }

    std::vector<double> upper() const
    {
        std::vector<double> out;
        for (int j = 0; j < d_; ++j)
            for (int k = j + 1; k < d_; ++k)
                out.push_back((*this)(j, k));
        return out;
    }

    bool is_zero() const
    {
        return std::all_of(entries_.begin(), entries_.end(), [](double x) { return x == 0.0; });
    }

    bool operator==(const ThetaMatrix&) const = default;

private:
    int d_ = 0;
    std::vector<double> entries_;
};

// All n in Z^d with |n|_inf <= R, ordered by |n|^2 then lexicographically.
class LatticeGrid {
public:
    static constexpr int default_max_dim = 4;

    LatticeGrid(int d, int radius, int max_dim = default_max_dim) : d_(d), radius_(radius)
    {
        if (d < 1 || d > max_dim)
            throw Error(ErrorCode::invalid_parameter,
                        "dimension " + std::to_string(d) + " outside [1, " +
                            std::to_string(max_dim) + "]");
        if (radius < 0)
            throw Error(ErrorCode::invalid_parameter, "radius must be >= 0");
        const long side = 2L * radius + 1;
        long total = 1;
        for (int j = 0; j < d; ++j) {
            total *= side;
            if (total > 50'000'000L)
                throw Error(ErrorCode::cap_exceeded, "lattice grid too large");
        }

        std::vector<std::vector<int>> pts(static_cast<std::size_t>(total), std::vector<int>(std::size_t(d)));
        for (long code = 0; code < total; ++code) {
            long c = code;
            for (int j = d - 1; j >= 0; --j) {
                pts[std::size_t(code)][std::size_t(j)] = int(c % side) - radius;
                c /= side;
            }
        }
        auto norm2 = [](const std::vector<int>& n) {
            long s = 0;
            for (int x : n)
                s += long(x) * x;
            return s;
        };
        std::stable_sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
            const long na = norm2(a);
            const long nb = norm2(b);
            return na != nb ? na < nb : a < b;
        });

        points_.reserve(std::size_t(total * d));
        norm2_.reserve(std::size_t(total));
        lookup_.assign(std::size_t(total), 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            points_.insert(points_.end(), pts[i].begin(), pts[i].end());
            norm2_.push_back(norm2(pts[i]));
            lookup_[std::size_t(encode(pts[i]))] = i;
        }
    }

    int dim() const { return d_; }
    int radius() const { return radius_; }
    std::size_t size() const { return norm2_.size(); }

    std::span<const int> point(std::size_t i) const
    {
        return {points_.data() + i * std::size_t(d_), std::size_t(d_)};
    }

    long norm2(std::size_t i) const { return norm2_[i]; }
    const std::vector<long>& norms2() const { return norm2_; }

    bool contains(std::span<const int> n) const
    {
        return std::all_of(n.begin(), n.end(), [&](int x) { return std::abs(x) <= radius_; });
    }

    std::optional<std::size_t> index_of(std::span<const int> n) const
    {
        if (int(n.size()) != d_ || !contains(n))
            return std::nullopt;
        return lookup_[std::size_t(encode(n))];
    }

    long sup_norm(std::size_t i) const
    {
        long s = 0;
        for (int x : point(i))
            s = std::max<long>(s, std::abs(x));
        return s;
    }

    bool operator==(const LatticeGrid& o) const { return d_ == o.d_ && radius_ == o.radius_; }

private:
    template <typename Range>
    long encode(const Range& n) const
    {
        long code = 0;
        for (int x : n)
            code = code * (2L * radius_ + 1) + (x + radius_);
        return code;
    }

    int d_;
    int radius_;
    std::vector<int> points_;
    std::vector<long> norm2_;
    std::vector<std::size_t> lookup_;
};

using GridPtr = std::shared_ptr<const LatticeGrid>;

inline GridPtr make_grid(int d, int radius, int max_dim = LatticeGrid::default_max_dim)
{
    return std::make_shared<const LatticeGrid>(d, radius, max_dim);
}

// Phase (in turns) with U^m U^n = exp(2 pi i phi(m,n)) U^{m+n}.
inline double twisted_phase(std::span<const int> m, std::span<const int> n,
                            const ThetaMatrix& theta)
{
    double phi = 0.0;
    const int d = theta.dim();
    for (int j = 1; j < d; ++j)
        for (int k = 0; k < j; ++k)
            phi += double(m[j]) * double(n[k]) * theta(j, k);
    return phi;
}

inline cplx phase_factor(double turns)
{
    if (turns == 0.0)
        return {1.0, 0.0};
    return std::polar(1.0, two_pi * turns);
}

inline double laplace_eigenvalue(std::span<const int> n)
{
    double s = 0.0;
    for (int x : n)
        s += double(x) * x;
    return 4.0 * std::numbers::pi * std::numbers::pi * s;
}

inline double laplace_eigenvalue_from_norm2(long norm2)
{
    return 4.0 * std::numbers::pi * std::numbers::pi * double(norm2);
}

inline double sobolev_weight(std::span<const int> n, double s)
{
    return std::pow(1.0 + laplace_eigenvalue(n), 0.5 * s);
}

// Truncated element sum_n a_n U^n of the quantum torus.
class TorusElement {
public:
    TorusElement(GridPtr grid, ThetaMatrix theta)
        : TorusElement(grid, std::move(theta), VectorXcd::Zero(Eigen::Index(grid->size())))
    {
    }

    TorusElement(GridPtr grid, ThetaMatrix theta, VectorXcd coeffs, double dropped_mass = 0.0)
        : grid_(std::move(grid)), theta_(std::move(theta)), coeffs_(std::move(coeffs)),
          dropped_mass_(dropped_mass)
    {
        if (!grid_)
            throw Error(ErrorCode::invalid_parameter, "element needs a grid");
        if (theta_.dim() != grid_->dim())
            throw Error(ErrorCode::grid_mismatch, "theta and grid dimensions differ");
        if (coeffs_.size() != Eigen::Index(grid_->size()))
            throw Error(ErrorCode::grid_mismatch, "coefficient count differs from grid size");
    }

    static TorusElement monomial(GridPtr grid, ThetaMatrix theta, std::span<const int> n,
                                 cplx c = 1.0)
    {
        TorusElement a(grid, std::move(theta));
        const auto idx = grid->index_of(n);
        if (!idx)
            throw Error(ErrorCode::grid_mismatch, "monomial outside grid");
        a.coeffs_[Eigen::Index(*idx)] = c;
        return a;
    }

    static TorusElement unit(GridPtr grid, ThetaMatrix theta, cplx c = 1.0)
    {
        TorusElement a(grid, std::move(theta));
        a.coeffs_[0] = c;
        return a;
    }

    const GridPtr& grid() const { return grid_; }
    const ThetaMatrix& theta() const { return theta_; }
    const VectorXcd& coeffs() const { return coeffs_; }
    double dropped_mass() const { return dropped_mass_; }

    cplx coeff(std::span<const int> n) const
    {
        const auto idx = grid_->index_of(n);
        return idx ? coeffs_[Eigen::Index(*idx)] : cplx{};
    }

    bool same_space(const TorusElement& o) const
    {
        return *grid_ == *o.grid_ && theta_ == o.theta_;
    }

    // Same coefficients viewed on another grid; mass outside it is dropped.
    TorusElement on_grid(GridPtr other) const
    {
        if (other->dim() != grid_->dim())
            throw Error(ErrorCode::grid_mismatch, "cannot move element across dimensions");
        VectorXcd c = VectorXcd::Zero(Eigen::Index(other->size()));
        double lost = dropped_mass_;
        for (std::size_t i = 0; i < grid_->size(); ++i) {
            const cplx v = coeffs_[Eigen::Index(i)];
            if (v == cplx{})
                continue;
            if (const auto j = other->index_of(grid_->point(i)))
                c[Eigen::Index(*j)] = v;
            else
                lost += std::abs(v);
        }
        return TorusElement(std::move(other), theta_, std::move(c), lost);
    }

    TorusElement operator+(const TorusElement& o) const
    {
        check_same(o);
        return TorusElement(grid_, theta_, coeffs_ + o.coeffs_, dropped_mass_ + o.dropped_mass_);
    }

    TorusElement operator-(const TorusElement& o) const
    {
        check_same(o);
        return TorusElement(grid_, theta_, coeffs_ - o.coeffs_, dropped_mass_ + o.dropped_mass_);
    }

    TorusElement scaled(cplx c) const
    {
        return TorusElement(grid_, theta_, coeffs_ * c, std::abs(c) * dropped_mass_);
    }

    void check_same(const TorusElement& o) const
    {
        if (!same_space(o))
            throw Error(ErrorCode::grid_mismatch, "elements live on different grids or thetas");
    }

private:
    GridPtr grid_;
    ThetaMatrix theta_;
    VectorXcd coeffs_;
    double dropped_mass_ = 0.0;
};

// Twisted convolution restricted to the common grid. Products landing outside
// are dropped and their total |a_m b_n| recorded on the result.
inline TorusElement multiply(const TorusElement& a, const TorusElement& b)
{
    a.check_same(b);
    const LatticeGrid& g = *a.grid();
    const int d = g.dim();
    VectorXcd out = VectorXcd::Zero(Eigen::Index(g.size()));
    double dropped = 0.0;
    std::vector<int> p(static_cast<std::size_t>(d), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx ai = a.coeffs()[Eigen::Index(i)];
        if (ai == cplx{})
            continue;
        const auto m = g.point(i);
        for (std::size_t j = 0; j < g.size(); ++j) {
            const cplx bj = b.coeffs()[Eigen::Index(j)];
            if (bj == cplx{})
                continue;
            const auto n = g.point(j);
            for (int k = 0; k < d; ++k)
                p[std::size_t(k)] = m[k] + n[k];
            if (const auto idx = g.index_of(p))
                out[Eigen::Index(*idx)] += ai * bj * phase_factor(twisted_phase(m, n, a.theta()));
            else
                dropped += std::abs(ai) * std::abs(bj);
        }
    }
    return TorusElement(a.grid(), a.theta(), std::move(out),
                        dropped + a.dropped_mass() + b.dropped_mass());
}

// (U^n)* = exp(2 pi i sum_{j>k} n_j n_k theta_jk) U^{-n}.
inline TorusElement adjoint(const TorusElement& a)
{
    const LatticeGrid& g = *a.grid();
    VectorXcd out = VectorXcd::Zero(Eigen::Index(g.size()));
    std::vector<int> neg(static_cast<std::size_t>(g.dim()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx v = a.coeffs()[Eigen::Index(i)];
        if (v == cplx{})
            continue;
        const auto n = g.point(i);
        for (int k = 0; k < g.dim(); ++k)
            neg[std::size_t(k)] = -n[k];
        const std::size_t j = *g.index_of(neg);
        out[Eigen::Index(j)] = std::conj(v) * phase_factor(twisted_phase(n, n, a.theta()));
    }
    return TorusElement(a.grid(), a.theta(), std::move(out), a.dropped_mass());
}

inline cplx trace(const TorusElement& a) { return a.coeffs()[0]; }

// Dense operator on span{U^n : n in grid}, the truncated GNS space.
struct MatrixRep {
    GridPtr grid;
    MatrixXcd entries;
    bool hermitian = false;

    MatrixRep() = default;

    MatrixRep(GridPtr g, MatrixXcd m, bool claim_hermitian = false)
        : grid(std::move(g)), entries(std::move(m)), hermitian(claim_hermitian)
    {
        if (!grid || entries.rows() != Eigen::Index(grid->size()) ||
            entries.cols() != Eigen::Index(grid->size()))
            throw Error(ErrorCode::grid_mismatch, "matrix size differs from grid size");
        if (!entries.allFinite())
            throw Error(ErrorCode::invalid_parameter, "matrix has non-finite entries");
        if (hermitian && hermiticity_defect() > 1e-12)
            throw Error(ErrorCode::not_self_adjoint, "hermitian flag set on non-hermitian matrix");
    }

    double hermiticity_defect() const { return (entries - entries.adjoint()).cwiseAbs().maxCoeff(); }
};

// Left multiplication by a on the given grid (defaults to the element's own):
// M(a)[m, n] = a_{m-n} exp(2 pi i phi(m-n, n)).
inline MatrixRep matrix_rep(const TorusElement& a, GridPtr target = nullptr)
{
    if (!target)
        target = a.grid();
    if (target->dim() != a.grid()->dim())
        throw Error(ErrorCode::grid_mismatch, "target grid dimension differs");
    const LatticeGrid& g = *target;
    const LatticeGrid& src = *a.grid();
    const int d = g.dim();
    const auto size = Eigen::Index(g.size());
    MatrixXcd m = MatrixXcd::Zero(size, size);
    std::vector<int> diff(static_cast<std::size_t>(d));
    for (Eigen::Index col = 0; col < size; ++col) {
        const auto n = g.point(std::size_t(col));
        for (Eigen::Index row = 0; row < size; ++row) {
            const auto p = g.point(std::size_t(row));
            for (int k = 0; k < d; ++k)
                diff[std::size_t(k)] = p[k] - n[k];
            const auto idx = src.index_of(diff);
            if (!idx)
                continue;
            const cplx c = a.coeffs()[Eigen::Index(*idx)];
            if (c != cplx{})
                m(row, col) = c * phase_factor(twisted_phase(diff, n, a.theta()));
        }
    }
    return MatrixRep(std::move(target), std::move(m));
}

// Grid indices with |n|_inf <= R - margin.
inline std::vector<Eigen::Index> interior_indices(const LatticeGrid& g, int margin)
{
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.sup_norm(i) <= g.radius() - margin)
            out.push_back(Eigen::Index(i));
    return out;
}

inline MatrixXcd submatrix(const MatrixXcd& m, const std::vector<Eigen::Index>& idx)
{
    return m(idx, idx);
}

// Diagonal of the positive Laplacian in grid order.
inline VectorXd laplace_diagonal(const LatticeGrid& g)
{
    VectorXd out(Eigen::Index(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i)
        out[Eigen::Index(i)] = laplace_eigenvalue_from_norm2(g.norm2(i));
    return out;
}

// (sum_n w_s(n)^2 |a_n|^2)^{1/2}
inline double sobolev_norm(const TorusElement& a, double s)
{
    const LatticeGrid& g = *a.grid();
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = std::pow(1.0 + laplace_eigenvalue_from_norm2(g.norm2(i)), 0.5 * s);
        sum += w * w * std::norm(a.coeffs()[Eigen::Index(i)]);
    }
    return std::sqrt(sum);
}

inline double l2_norm(const TorusElement& a) { return a.coeffs().norm(); }

// Coefficients i.i.d. complex Gaussian on |n|_inf <= support, zero elsewhere.
template <typename Rng>
TorusElement random_element(GridPtr grid, ThetaMatrix theta, Rng& rng, int support = -1)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (support < 0)
        support = grid->radius();
    VectorXcd c = VectorXcd::Zero(Eigen::Index(grid->size()));
    for (std::size_t i = 0; i < grid->size(); ++i) {
        if (grid->sup_norm(i) > support)
            continue;
        const double re = gauss(rng);
        const double im = gauss(rng);
        c[Eigen::Index(i)] = cplx(re, im);
    }
    return TorusElement(std::move(grid), std::move(theta), std::move(c));
}

} // namespace oslab

#endif // OSLAB_QTORUS_HPP
