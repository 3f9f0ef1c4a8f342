#ifndef BOUNDFORGE_DOMAIN_HPP
#define BOUNDFORGE_DOMAIN_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace boundforge {

using Value = std::int64_t;

/// Finite ordered set of integers stored as a bitset over the initial
/// interval. Pruning only ever removes values; an emptied domain signals
/// failure to the owning model.
class Domain {
public:
    /// Throws Error(InvalidDomain) when lo > hi.
    Domain(Value lo, Value hi);

    Value min() const noexcept { return min_; }
    Value max() const noexcept { return max_; }
    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    bool fixed() const noexcept { return size_ == 1; }
    bool contains(Value v) const noexcept;

    /// Ascending list of the current values.
    std::vector<Value> values() const;

    // Each mutator returns true when the domain changed.
    bool remove_below(Value v);
    bool remove_above(Value v);
    bool remove(Value v);
    bool assign(Value v);

    friend bool operator==(const Domain& a, const Domain& b);

private:
    bool test(Value v) const noexcept
    {
        auto off = static_cast<std::uint64_t>(v - base_);
        return (bits_[off >> 6] >> (off & 63)) & 1U;
    }
    void clear_bit(Value v) noexcept
    {
        auto off = static_cast<std::uint64_t>(v - base_);
        bits_[off >> 6] &= ~(std::uint64_t{1} << (off & 63));
    }
    void make_empty() noexcept;
    void recompute_min();
    void recompute_max();

    Value base_;
    Value last_;
    Value min_;
    Value max_;
    std::size_t size_;
    std::vector<std::uint64_t> bits_;
};

std::ostream& operator<<(std::ostream& os, const Domain& d);

} // namespace boundforge

#endif
