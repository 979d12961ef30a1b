#ifndef OSLAB_YOUNG_HPP
#define OSLAB_YOUNG_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "error.hpp"
#include "verdict.hpp"

namespace oslab {

namespace detail {

inline std::string format_number(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view s, std::string_view what)
{
    double value = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::invalid_parameter,
                    "cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
    return value;
}

} // namespace detail

// Result of the sampled check of the Young axioms (zero at zero, monotone,
// midpoint convex, inverse round trip).
struct AxiomReport {
    bool ok = true;
    double worst_violation = 0.0;
    std::string first_violation;
};

// Phi(t) is squeezed between coeff * t^exponent for 0 <= t <= t_max.
struct PowerBound {
    double coeff = 1.0;
    double exponent = 1.0;
    double t_max = 1.0;
};

class YoungFunction {
public:
    static constexpr double default_eval_cap = 1e15;

    struct Power {
        double p;
    };
    struct PowerLog {
        double p;
        double alpha;
    };
    struct Interpolated {
        std::shared_ptr<const YoungFunction> phi0;
        std::shared_ptr<const YoungFunction> phi1;
        double theta;
    };
    using Kind = std::variant<Power, PowerLog, Interpolated>;

    static YoungFunction power(double p, double eval_cap = default_eval_cap)
    {
        if (!(p >= 1.0) || !std::isfinite(p))
            throw Error(ErrorCode::invalid_parameter, "power exponent must be >= 1");
        YoungFunction phi(Power{p}, eval_cap);
        phi.validate_or_throw();
        return phi;
    }

    static YoungFunction power_log(double p, double alpha, double eval_cap = default_eval_cap)
    {
        if (!(p >= 1.0) || !std::isfinite(p) || !std::isfinite(alpha))
            throw Error(ErrorCode::invalid_parameter, "powerlog needs p >= 1 and finite alpha");
        YoungFunction phi(PowerLog{p, alpha}, eval_cap);
        phi.validate_or_throw();
        return phi;
    }

    friend YoungFunction interpolate(const YoungFunction& phi0, const YoungFunction& phi1,
                                     double theta);

    const Kind& kind() const { return kind_; }
    double eval_cap() const { return eval_cap_; }
    const AxiomReport& axioms() const { return axioms_; }

    // Set on interpolated functions whose sampled convexity check failed.
    bool non_convex() const { return !axioms_.ok; }

    double operator()(double t) const { return eval(t); }

    double eval(double t) const
    {
        if (!(t >= 0.0))
            throw Error(ErrorCode::invalid_parameter, "Young function argument must be >= 0");
        if (t > eval_cap_)
            throw Error(ErrorCode::overflow_domain,
                        "argument " + detail::format_number(t) + " exceeds eval cap");
        return raw(t);
    }

    // No domain checks; returns +inf past the eval cap.
    double eval_saturating(double t) const
    {
        if (t > eval_cap_)
            return std::numeric_limits<double>::infinity();
        return raw(t);
    }

    double inverse(double y) const
    {
        if (!(y >= 0.0))
            throw Error(ErrorCode::invalid_parameter, "inverse needs y >= 0");
        if (y == 0.0)
            return 0.0;
        return std::visit([&](const auto& k) { return inverse_impl(k, y); }, kind_);
    }

    PowerBound small_argument_minorant() const { return small_argument_bound(false); }
    PowerBound small_argument_majorant() const { return small_argument_bound(true); }

    std::string descriptor() const
    {
        using detail::format_number;
        if (auto* k = std::get_if<Power>(&kind_))
            return "power:p=" + format_number(k->p);
        if (auto* k = std::get_if<PowerLog>(&kind_))
            return "powerlog:p=" + format_number(k->p) + ",alpha=" + format_number(k->alpha);
        const auto& k = std::get<Interpolated>(kind_);
        return "interp:theta=" + format_number(k.theta) + ":(" + k.phi0->descriptor() + ")|(" +
               k.phi1->descriptor() + ")";
    }

private:
    YoungFunction(Kind kind, double eval_cap) : kind_(std::move(kind)), eval_cap_(eval_cap)
    {
        if (!(eval_cap_ > 1.0))
            throw Error(ErrorCode::invalid_parameter, "eval cap must exceed 1");
    }

    double raw(double t) const
    {
        if (t == 0.0)
            return 0.0;
        if (auto* k = std::get_if<Power>(&kind_))
            return k->p == 1.0 ? t : std::pow(t, k->p);
        if (auto* k = std::get_if<PowerLog>(&kind_))
            return std::pow(t, k->p) * std::pow(std::log(std::numbers::e + t), k->alpha);
        return eval_interpolated(std::get<Interpolated>(kind_), t);
    }

    double inverse_impl(const Power& k, double y) const
    {
        return k.p == 1.0 ? y : std::pow(y, 1.0 / k.p);
    }

    // Doubling/halving bracket, then bisection until the residual and the
    // relative bracket width are both below 1e-12.
    double inverse_impl(const PowerLog&, double y) const
    {
        double lo = 1.0;
        double hi = 1.0;
        if (raw(1.0) < y) {
            while (raw(hi) < y) {
                lo = hi;
                hi *= 2.0;
                if (!std::isfinite(hi))
                    throw Error(ErrorCode::no_convergence, "inverse bracket overflow");
            }
        } else {
            while (raw(lo) > y) {
                hi = lo;
                lo *= 0.5;
                if (lo == 0.0)
                    throw Error(ErrorCode::no_convergence, "inverse bracket underflow");
            }
        }
        const double tol = 1e-12 * (1.0 + y);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = raw(mid);
            if ((std::abs(fm - y) <= tol && hi - lo <= 1e-12 * hi) || mid <= lo || mid >= hi)
                return mid;
            (fm < y ? lo : hi) = mid;
        }
        throw Error(ErrorCode::no_convergence, "inverse bisection bracket [" +
                                                   detail::format_number(lo) + ", " +
                                                   detail::format_number(hi) + "]");
    }

    double inverse_impl(const Interpolated& k, double y) const
    {
        return std::pow(k.phi0->inverse(y), 1.0 - k.theta) * std::pow(k.phi1->inverse(y), k.theta);
    }

    // Inverts the defining inverse relation by geometric bisection in y.
    double eval_interpolated(const Interpolated& k, double t) const
    {
        auto inv = [&](double y) { return inverse_impl(k, y); };
        double lo = 1.0;
        double hi = 1.0;
        if (inv(1.0) < t) {
            while (inv(hi) < t) {
                lo = hi;
                hi *= 16.0;
                if (!std::isfinite(hi))
                    return std::numeric_limits<double>::infinity();
            }
        } else {
            while (inv(lo) > t) {
                hi = lo;
                lo /= 16.0;
                if (lo == 0.0)
                    return 0.0;
            }
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = std::sqrt(lo * hi);
            if (hi - lo <= 1e-15 * hi || mid <= lo || mid >= hi)
                return mid;
            (inv(mid) < t ? lo : hi) = mid;
        }
        throw Error(ErrorCode::no_convergence, "interpolated evaluation did not converge");
    }

    PowerBound small_argument_bound(bool upper) const
    {
        if (auto* k = std::get_if<Power>(&kind_))
            return {1.0, k->p, 1.0};
        if (auto* k = std::get_if<PowerLog>(&kind_)) {
            // log(e + t) lies in [1, log(e + 1)] for t in [0, 1].
            const double at_one = std::pow(std::log(std::numbers::e + 1.0), k->alpha);
            const bool grows = k->alpha >= 0.0;
            return {(upper == grows) ? at_one : 1.0, k->p, 1.0};
        }
        const auto& k = std::get<Interpolated>(kind_);
        const PowerBound b0 = upper ? k.phi0->small_argument_majorant()
                                    : k.phi0->small_argument_minorant();
        const PowerBound b1 = upper ? k.phi1->small_argument_majorant()
                                    : k.phi1->small_argument_minorant();
        const double y0 = std::min((*k.phi0)(b0.t_max), (*k.phi1)(b1.t_max));
        const double inv_q = (1.0 - k.theta) / b0.exponent + k.theta / b1.exponent;
        const double scale = std::pow(b0.coeff, -(1.0 - k.theta) / b0.exponent) *
                             std::pow(b1.coeff, -k.theta / b1.exponent);
        const double q = 1.0 / inv_q;
        return {std::pow(scale, -q), q, inverse(y0)};
    }

    AxiomReport check_axioms() const;

    void validate_or_throw()
    {
        axioms_ = check_axioms();
        if (!axioms_.ok)
            throw Error(ErrorCode::invalid_parameter,
                        descriptor() + " violates Young axioms: " + axioms_.first_violation);
    }

    Kind kind_;
    double eval_cap_;
    AxiomReport axioms_;
};

inline AxiomReport YoungFunction::check_axioms() const
{
    AxiomReport report;
    auto flag = [&](double amount, const std::string& what) {
        if (report.ok)
            report.first_violation = what;
        report.ok = false;
        report.worst_violation = std::max(report.worst_violation, amount);
    };

    if (raw(0.0) != 0.0)
        flag(std::abs(raw(0.0)), "Phi(0) != 0");

    const double t_hi = std::min(eval_cap_, 1e9);
    constexpr int points = 72;
    std::vector<double> ts(points);
    std::vector<double> vals(points);
    for (int i = 0; i < points; ++i) {
        ts[i] = 1e-9 * std::pow(t_hi / 1e-9, double(i) / (points - 1));
        vals[i] = raw(ts[i]);
    }
    for (int i = 0; i + 1 < points; ++i) {
        if (vals[i + 1] < vals[i] * (1.0 - 1e-12))
            flag((vals[i] - vals[i + 1]) / vals[i],
                 "decreasing at t=" + detail::format_number(ts[i]));
    }
    for (int i = 0; i < points; ++i) {
        // Pair (0, t) plus a few geometric neighbours.
        const double half = raw(0.5 * ts[i]);
        const double slack0 = 1e-12 * (1.0 + vals[i]);
        if (half > 0.5 * vals[i] + slack0)
            flag(half - 0.5 * vals[i], "midpoint convexity fails on (0, " +
                                           detail::format_number(ts[i]) + ")");
        for (int j = i + 1; j < std::min(points, i + 5); ++j) {
            const double mid = raw(0.5 * (ts[i] + ts[j]));
            const double chord = 0.5 * (vals[i] + vals[j]);
            if (mid > chord + 1e-12 * (1.0 + vals[j]))
                flag(mid - chord, "midpoint convexity fails on (" + detail::format_number(ts[i]) +
                                      ", " + detail::format_number(ts[j]) + ")");
        }
    }
    for (int i = 0; i < points; i += 3) {
        const double y = ts[i];
        const double back = raw(inverse(y));
        const double rel = std::abs(back - y) / y;
        if (rel > 1e-9)
            flag(rel, "inverse round trip off at y=" + detail::format_number(y));
    }
    return report;
}

// Young function with inverse Phi0^{-1}(t)^{1-theta} * Phi1^{-1}(t)^theta.
// A failed sampled-convexity check is recorded on the result, not thrown.
inline YoungFunction interpolate(const YoungFunction& phi0, const YoungFunction& phi1,
                                 double theta)
{
    if (!(theta > 0.0 && theta < 1.0))
        throw Error(ErrorCode::invalid_parameter, "interpolation parameter must lie in (0,1)");
    YoungFunction phi(YoungFunction::Interpolated{std::make_shared<const YoungFunction>(phi0),
                                                  std::make_shared<const YoungFunction>(phi1),
                                                  theta},
                      std::min(phi0.eval_cap(), phi1.eval_cap()));
    phi.axioms_ = phi.check_axioms();
    return phi;
}

// Parses `power:p=2`, `powerlog:p=2,alpha=1`,
// `interp:theta=0.5:(power:p=1)|(power:p=2)`.
inline YoungFunction parse_young(std::string_view text)
{
    using detail::parse_number;
    auto bad = [&](const std::string& why) {
        return Error(ErrorCode::invalid_parameter,
                     "bad Young descriptor '" + std::string(text) + "': " + why);
    };
    auto take_key = [&](std::string_view& rest, std::string_view key) {
        if (rest.substr(0, key.size()) != key || rest.size() <= key.size() ||
            rest[key.size()] != '=')
            throw bad("expected '" + std::string(key) + "='");
        rest.remove_prefix(key.size() + 1);
    };

    if (text.starts_with("power:")) {
        std::string_view rest = text.substr(6);
        take_key(rest, "p");
        return YoungFunction::power(parse_number(rest, "p"));
    }
    if (text.starts_with("powerlog:")) {
        std::string_view rest = text.substr(9);
        take_key(rest, "p");
        const auto comma = rest.find(',');
        if (comma == std::string_view::npos)
            throw bad("missing alpha");
        const double p = parse_number(rest.substr(0, comma), "p");
        rest.remove_prefix(comma + 1);
        take_key(rest, "alpha");
        return YoungFunction::power_log(p, parse_number(rest, "alpha"));
    }
    if (text.starts_with("interp:")) {
        std::string_view rest = text.substr(7);
        take_key(rest, "theta");
        const auto colon = rest.find(':');
        if (colon == std::string_view::npos)
            throw bad("missing ':' after theta");
        const double theta = parse_number(rest.substr(0, colon), "theta");
        rest.remove_prefix(colon + 1);
        auto group = [&](std::string_view& s) {
            if (s.empty() || s.front() != '(')
                throw bad("expected '('");
            int depth = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                depth += s[i] == '(' ? 1 : s[i] == ')' ? -1 : 0;
                if (depth == 0) {
                    auto inner = s.substr(1, i - 1);
                    s.remove_prefix(i + 1);
                    return inner;
                }
            }
            throw bad("unbalanced parentheses");
        };
        const auto first = group(rest);
        if (rest.empty() || rest.front() != '|')
            throw bad("expected '|'");
        rest.remove_prefix(1);
        const auto second = group(rest);
        if (!rest.empty())
            throw bad("trailing characters");
        return interpolate(parse_young(first), parse_young(second), theta);
    }
    throw bad("unknown kind");
}

// inf{lambda > 0 : sum Phi(mu_i / lambda) <= 1} for a nonincreasing,
// nonnegative sequence.
inline double luxemburg_norm(std::span<const double> mu, const YoungFunction& phi)
{
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!(mu[i] >= 0.0) || !std::isfinite(mu[i]))
            throw Error(ErrorCode::invalid_parameter, "sequence entries must be finite and >= 0");
        if (i > 0 && mu[i] > mu[i - 1])
            throw Error(ErrorCode::not_sorted,
                        "sequence increases at index " + std::to_string(i));
    }
    if (mu.empty() || mu.front() == 0.0)
        return 0.0;

    auto mass = [&](double lambda) {
        double sum = 0.0;
        for (double m : mu) {
            if (m == 0.0)
                break;
            sum += phi.eval_saturating(m / lambda);
        }
        return sum;
    };

    double hi = mu.front();
    int guard = 0;
    while (mass(hi) > 1.0) {
        hi *= 2.0;
        if (++guard > 2000)
            throw Error(ErrorCode::no_convergence, "could not bracket Luxemburg norm from above");
    }
    double lo = hi;
    while (mass(lo) <= 1.0) {
        lo *= 0.5;
        if (++guard > 2000)
            throw Error(ErrorCode::no_convergence, "could not bracket Luxemburg norm from below");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-14 * hi || mid <= lo || mid >= hi)
            return mid;
        (mass(mid) > 1.0 ? lo : hi) = mid;
    }
    throw Error(ErrorCode::no_convergence, "Luxemburg bisection bracket [" +
                                               detail::format_number(lo) + ", " +
                                               detail::format_number(hi) + "]");
}

inline double luxemburg_norm(const std::vector<double>& mu, const YoungFunction& phi)
{
    return luxemburg_norm(std::span<const double>(mu), phi);
}

// mu_n <= amplitude * n^{-exponent} for n >= start_index (1-based ranks).
struct TailEnvelope {
    double amplitude = 1.0;
    double exponent = 1.0;
    std::size_t start_index = 1;

    double operator()(double n) const { return amplitude * std::pow(n, -exponent); }

    // Throws unless the envelope dominates values[start_index-1 ..].
    void check_dominates(std::span<const double> values) const
    {
        for (std::size_t i = start_index - 1; i < values.size(); ++i) {
            const double bound = (*this)(double(i + 1));
            if (values[i] > bound * (1.0 + 1e-12))
                throw Error(ErrorCode::invalid_parameter,
                            "envelope below value at rank " + std::to_string(i + 1));
        }
    }

    // Smallest amplitude >= min_amplitude that dominates the given values.
    static TailEnvelope fit(std::span<const double> values, double exponent,
                            std::size_t start_index, double min_amplitude = 0.0)
    {
        if (!(exponent > 0.0) || start_index < 1)
            throw Error(ErrorCode::invalid_parameter, "envelope needs exponent > 0, start >= 1");
        double amp = min_amplitude;
        for (std::size_t i = start_index - 1; i < values.size(); ++i)
            amp = std::max(amp, values[i] * std::pow(double(i + 1), exponent));
        if (!(amp > 0.0))
            throw Error(ErrorCode::invalid_parameter, "envelope amplitude must be > 0");
        TailEnvelope env{amp, exponent, start_index};
        env.check_dominates(values);
        return env;
    }
};

struct Bracket {
    double lower = 0.0;
    double upper = 0.0;
};

// Bounds on the integral of Phi(scale * amplitude * x^{-r}) over [x0, inf).
// Quadrature in u = log x on unit blocks; once the argument drops below the
// small-argument bound range, the remainder is closed-form on both sides.
inline Bracket envelope_integral(const YoungFunction& phi, const TailEnvelope& env, double x0,
                                 double scale = 1.0)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    const PowerBound minor = phi.small_argument_minorant();
    const PowerBound major = phi.small_argument_majorant();
    const double c = env.amplitude * scale;
    const double r = env.exponent;
    const double t_cut = std::min(minor.t_max, major.t_max);

    if (minor.exponent * r <= 1.0)
        return {inf, inf};

    auto integrand = [&](double u) {
        return phi.eval_saturating(c * std::exp(-r * u)) * std::exp(u);
    };
    auto remainder = [&](const PowerBound& b, double u) {
        const double qr = b.exponent * r;
        return b.coeff * std::pow(c, b.exponent) * std::exp((1.0 - qr) * u) / (qr - 1.0);
    };

    double sum = 0.0;
    double u = std::log(x0);
    constexpr double u_max = 700.0;
    while (u < u_max) {
        if (c * std::exp(-r * u) <= t_cut && major.exponent * r > 1.0) {
            const double rem_hi = remainder(major, u);
            const double rem_lo = remainder(minor, u);
            if (rem_hi - rem_lo <= 1e-13 * (1.0 + sum + rem_lo) || u + 1.0 >= u_max)
                return {sum + rem_lo, sum + rem_hi};
        }
        sum += boost::math::quadrature::gauss<double, 20>::integrate(integrand, u, u + 1.0);
        u += 1.0;
        if (!std::isfinite(sum))
            return {inf, inf};
    }
    return {sum, major.exponent * r > 1.0 ? sum + remainder(major, u) : inf};
}

// Convergence of sum_n Phi(mu_n) where mu is head (exact, ranks 1..N) followed
// by the envelope tail from rank N+1.
inline Verdict series_membership(const TailEnvelope& env, const YoungFunction& phi,
                                 std::span<const double> head)
{
    const std::size_t n_head = head.size();
    if (env.start_index > n_head + 1)
        throw Error(ErrorCode::invalid_parameter, "envelope must start at or before rank N+1");

    double head_sum = 0.0;
    for (double m : head)
        head_sum += phi.eval_saturating(m);

    const PowerBound minor = phi.small_argument_minorant();
    const PowerBound major = phi.small_argument_majorant();
    const double r = env.exponent;

    if (minor.exponent * r <= 1.0) {
        // Phi(c n^{-r}) >= m c^q n^{-q r} once c n^{-r} <= t_max; q r <= 1.
        const double n0 = std::max<double>(
            double(n_head + 1), std::ceil(std::pow(env.amplitude / minor.t_max, 1.0 / r)));
        const double qr = minor.exponent * r;
        const double k = minor.coeff * std::pow(env.amplitude, minor.exponent);
        const double n_witness = 1e12;
        // Lower integral bound of the minorant partial sum over [n0, n_witness].
        const double partial = qr == 1.0
                                   ? k * (std::log(n_witness) - std::log(n0 + 1.0))
                                   : k * (std::pow(n_witness, 1.0 - qr) -
                                          std::pow(n0 + 1.0, 1.0 - qr)) / (1.0 - qr);
        return Fails{"terms dominate " + detail::format_number(k) + " * n^-" +
                         detail::format_number(qr) + " from rank " + detail::format_number(n0) +
                         " (exponent <= 1, divergent); partial sum to n=1e12 exceeds " +
                         detail::format_number(head_sum + partial),
                     qr - 1.0};
    }

    Bracket tail;
    if (n_head == 0) {
        const Bracket rest = envelope_integral(phi, env, 1.0);
        tail = {rest.lower, phi.eval_saturating(env(1.0)) + rest.upper};
    } else {
        const Bracket from_n = envelope_integral(phi, env, double(n_head));
        const Bracket from_n1 = envelope_integral(phi, env, double(n_head + 1));
        tail = {from_n1.lower, from_n.upper};
    }
    const double lower = head_sum + tail.lower;
    const double upper = head_sum + tail.upper;
    if (major.exponent * r > 1.0 && std::isfinite(upper))
        return Holds{major.exponent * r - 1.0, lower, upper};
    return Inconclusive{lower, upper};
}

inline Verdict series_membership(const TailEnvelope& env, const YoungFunction& phi,
                                 const std::vector<double>& head)
{
    return series_membership(env, phi, std::span<const double>(head));
}

// Bracket for the Luxemburg norm of head followed by the envelope tail.
inline Bracket luxemburg_norm_with_tail(std::span<const double> head, const TailEnvelope& env,
                                        const YoungFunction& phi)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (phi.small_argument_minorant().exponent * env.exponent <= 1.0)
        return {inf, inf};
    const std::size_t n = head.size();
    auto solve = [&](bool upper) {
        auto mass = [&](double lambda) {
            double sum = 0.0;
            for (double m : head)
                sum += phi.eval_saturating(m / lambda);
            const Bracket t = n == 0 ? envelope_integral(phi, env, 1.0, 1.0 / lambda)
                                     : envelope_integral(phi, env, double(upper ? n : n + 1),
                                                         1.0 / lambda);
            return sum + (upper ? t.upper : t.lower);
        };
        double hi = std::max(head.empty() ? env.amplitude : head.front(), 1e-300);
        while (mass(hi) > 1.0)
            hi *= 2.0;
        double lo = hi;
        while (mass(lo) <= 1.0)
            lo *= 0.5;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (hi - lo <= 1e-12 * hi)
                return mid;
            (mass(mid) > 1.0 ? lo : hi) = mid;
        }
        throw Error(ErrorCode::no_convergence, "tail-corrected Luxemburg norm");
    };
    return {solve(false), solve(true)};
}

} // namespace oslab

#endif // OSLAB_YOUNG_HPP
