#include "boundforge/domain.hpp"

#include "boundforge/error.hpp"

#include <ostream>

namespace boundforge {

Domain::Domain(Value lo, Value hi)
    : base_(lo)
    , last_(hi)
    , min_(lo)
    , max_(hi)
    , size_(0)
{
    if (lo > hi)
        throw Error(ErrorCode::InvalidDomain,
                    "lower bound " + std::to_string(lo) + " exceeds upper bound " + std::to_string(hi));
    auto width = static_cast<std::uint64_t>(hi - lo) + 1;
    size_ = static_cast<std::size_t>(width);
    bits_.assign((width + 63) / 64, ~std::uint64_t{0});
    if (auto tail = width & 63)
        bits_.back() = (std::uint64_t{1} << tail) - 1;
}

bool Domain::contains(Value v) const noexcept
{
    if (size_ == 0 || v < min_ || v > max_)
        return false;
    return test(v);
}

std::vector<Value> Domain::values() const
{
    std::vector<Value> out;
    out.reserve(size_);
    if (size_ == 0)
        return out;
    for (Value v = min_; v <= max_; ++v)
        if (test(v))
            out.push_back(v);
    return out;
}

void Domain::make_empty() noexcept
{
    size_ = 0;
    for (auto& w : bits_)
        w = 0;
    min_ = base_;
    max_ = base_ - 1;
}

void Domain::recompute_min()
{
    while (min_ <= max_ && !test(min_))
        ++min_;
}

void Domain::recompute_max()
{
    while (max_ >= min_ && !test(max_))
        --max_;
}

bool Domain::remove_below(Value v)
{
    if (size_ == 0 || v <= min_)
        return false;
    if (v > max_) {
        make_empty();
        return true;
    }
    for (Value x = min_; x < v; ++x)
        if (test(x)) {
            clear_bit(x);
            --size_;
        }
    min_ = v;
    recompute_min();
    return true;
}

bool Domain::remove_above(Value v)
{
    if (size_ == 0 || v >= max_)
        return false;
    if (v < min_) {
        make_empty();
        return true;
    }
    for (Value x = max_; x > v; --x)
        if (test(x)) {
            clear_bit(x);
            --size_;
        }
    max_ = v;
    recompute_max();
    return true;
}

bool Domain::remove(Value v)
{
    if (!contains(v))
        return false;
    clear_bit(v);
    if (--size_ == 0) {
        make_empty();
        return true;
    }
    if (v == min_)
        recompute_min();
    else if (v == max_)
        recompute_max();
    return true;
}

bool Domain::assign(Value v)
{
    if (!contains(v)) {
        if (size_ == 0)
            return false;
        make_empty();
        return true;
    }
    if (size_ == 1)
        return false;
    for (auto& w : bits_)
        w = 0;
    auto off = static_cast<std::uint64_t>(v - base_);
    bits_[off >> 6] = std::uint64_t{1} << (off & 63);
    min_ = max_ = v;
    size_ = 1;
    return true;
}

bool operator==(const Domain& a, const Domain& b)
{
    if (a.size_ != b.size_)
        return false;
    if (a.size_ == 0)
        return true;
    if (a.min_ != b.min_ || a.max_ != b.max_)
        return false;
    for (Value v = a.min_; v <= a.max_; ++v)
        if (a.test(v) != b.test(v))
            return false;
    return true;
}

std::ostream& operator<<(std::ostream& os, const Domain& d)
{
    os << '{';
    bool first = true;
    for (auto v : d.values()) {
        if (!first)
            os << ',';
        os << v;
        first = false;
    }
    return os << '}';
}

} // namespace boundforge
