#ifndef BOUNDFORGE_ERROR_HPP
#define BOUNDFORGE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace boundforge {

enum class ErrorCode {
    InvalidDomain,
    InvalidArgument,
    InvalidInput,
    InvalidMark,
    UnsupportedConstraint,
    CatalogDefinition,
    CatalogSoundness,
    InfeasibleModel,
    InternalInvariant,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type carried across the library; `code()` tells callers
/// which contract was broken.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace boundforge

#endif
