#include "boundforge/error.hpp"

namespace boundforge {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidDomain: return "invalid-domain";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::InvalidMark: return "invalid-mark";
    case ErrorCode::UnsupportedConstraint: return "unsupported-constraint";
    case ErrorCode::CatalogDefinition: return "catalog-definition";
    case ErrorCode::CatalogSoundness: return "catalog-soundness";
    case ErrorCode::InfeasibleModel: return "infeasible-model";
    case ErrorCode::InternalInvariant: return "internal-invariant";
    }
    return "unknown";
}

} // namespace boundforge
