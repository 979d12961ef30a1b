#ifndef OSLAB_ERROR_HPP
#define OSLAB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace oslab {

enum class ErrorCode {
    overflow_domain,
    invalid_parameter,
    no_convergence,
    not_sorted,
    grid_mismatch,
    truncation_too_small,
    membership_failed,
    family_too_large,
    cap_exceeded,
    not_self_adjoint,
    not_psd,
    singular_operator,
    empty_pool,
    config,
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::overflow_domain: return "OverflowDomain";
    case ErrorCode::invalid_parameter: return "InvalidParameter";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::not_sorted: return "NotSorted";
    case ErrorCode::grid_mismatch: return "GridMismatch";
    case ErrorCode::truncation_too_small: return "TruncationTooSmall";
    case ErrorCode::membership_failed: return "MembershipFailed";
    case ErrorCode::family_too_large: return "FamilyTooLarge";
    case ErrorCode::cap_exceeded: return "CapExceeded";
    case ErrorCode::not_self_adjoint: return "NotSelfAdjoint";
    case ErrorCode::not_psd: return "NotPSD";
    case ErrorCode::singular_operator: return "SingularOperator";
    case ErrorCode::empty_pool: return "EmptyPool";
    case ErrorCode::config: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace oslab

#endif // OSLAB_ERROR_HPP
