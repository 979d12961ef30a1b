#ifndef OSLAB_VERDICT_HPP
#define OSLAB_VERDICT_HPP

#include <cmath>
#include <limits>
#include <string>
#include <variant>

namespace oslab {

// Outcome of an inequality or convergence check.
//
// For an inequality lhs <= rhs: lower = lhs, upper = rhs, margin = rhs - lhs.
// For a series: lower/upper bracket the sum, margin is the decay excess
// (effective exponent minus one, > 0 means summable).
struct Holds {
    double margin = 0.0;
    double lower = std::numeric_limits<double>::quiet_NaN();
    double upper = std::numeric_limits<double>::quiet_NaN();
};

struct Fails {
    std::string witness;
    double value = std::numeric_limits<double>::quiet_NaN();
};

struct Inconclusive {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
};

using Verdict = std::variant<Holds, Fails, Inconclusive>;

inline bool holds(const Verdict& v) { return std::holds_alternative<Holds>(v); }
inline bool fails(const Verdict& v) { return std::holds_alternative<Fails>(v); }
inline bool inconclusive(const Verdict& v) { return std::holds_alternative<Inconclusive>(v); }

inline const char* verdict_name(const Verdict& v)
{
    if (holds(v))
        return "Holds";
    if (fails(v))
        return "Fails";
    return "Inconclusive";
}

// Verdict for lhs <= rhs + slack.
inline Verdict check_le(double lhs, double rhs, double slack = 0.0, std::string witness = {})
{
    if (std::isfinite(lhs) && std::isfinite(rhs) && lhs <= rhs + slack)
        return Holds{rhs - lhs, lhs, rhs};
    if (witness.empty())
        witness = "lhs exceeds rhs";
    return Fails{std::move(witness), lhs - rhs};
}

} // namespace oslab

#endif // OSLAB_VERDICT_HPP
