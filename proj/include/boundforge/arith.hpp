#ifndef BOUNDFORGE_ARITH_HPP
#define BOUNDFORGE_ARITH_HPP

#include "boundforge/domain.hpp"

namespace boundforge {

// Integer division helpers; the divisor must be non-zero.

constexpr Value floor_div(Value a, Value b) noexcept
{
    Value q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

constexpr Value ceil_div(Value a, Value b) noexcept
{
    Value q = a / b;
    if ((a % b != 0) && ((a < 0) == (b < 0)))
        ++q;
    return q;
}

/// Euclidean remainder, always in [0, |b|).
constexpr Value euclid_mod(Value a, Value b) noexcept
{
    Value r = a % b;
    if (r < 0)
        r += b < 0 ? -b : b;
    return r;
}

/// Euclidean quotient, paired with euclid_mod so that a == b*q + r.
constexpr Value euclid_div(Value a, Value b) noexcept
{
    return (a - euclid_mod(a, b)) / b;
}

} // namespace boundforge

#endif
