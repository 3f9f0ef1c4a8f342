#ifndef BOUNDFORGE_OBJECTS_HPP
#define BOUNDFORGE_OBJECTS_HPP

#include "boundforge/model.hpp"

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace boundforge {

enum class ObjectKind { Partition, BinSeq };

std::string_view to_string(ObjectKind k) noexcept;
/// Accepts "partition" and "binseq".
std::optional<ObjectKind> parse_object(std::string_view s) noexcept;

inline constexpr std::size_t kPartitionFeatures = 5;
inline constexpr std::size_t kBinSeqFeatures = 10;

std::size_t feature_count(ObjectKind k) noexcept;
/// Feature names in featvar order.
std::span<const std::string_view> feature_names(ObjectKind k) noexcept;
std::optional<std::size_t> feature_index(ObjectKind k, std::string_view name) noexcept;

struct PartitionFeatures {
    Value n = 0;
    Value P = 0;
    Value Mmin = 0;
    Value Mmax = 0;
    Value rangeM = 0;
    Value S = 0;

    std::array<Value, kPartitionFeatures> values() const { return {P, Mmin, Mmax, rangeM, S}; }
    friend bool operator==(const PartitionFeatures&, const PartitionFeatures&) = default;
};

struct BinSeqFeatures {
    Value n = 0;
    Value N1 = 0;
    Value G = 0;
    Value Gmin = 0;
    Value Gmax = 0;
    Value rangeG = 0;
    Value GS = 0;
    Value Dmin = 0;
    Value Dmax = 0;
    Value rangeD = 0;
    Value DS = 0;

    std::array<Value, kBinSeqFeatures> values() const
    {
        return {N1, G, Gmin, Gmax, rangeG, GS, Dmin, Dmax, rangeD, DS};
    }
    friend bool operator==(const BinSeqFeatures&, const BinSeqFeatures&) = default;
};

/// Part sizes of a partition of n elements, in any order.
using PartSizes = std::vector<Value>;

/// Throws Error(InvalidInput) on an empty list or a size below 1.
PartitionFeatures partition_features(std::span<const Value> sizes);
/// Throws Error(InvalidInput) on anything other than 0/1.
BinSeqFeatures binseq_features(std::span<const Value> bits);

struct VarLayout {
    std::vector<VarRef> featvars;
    std::vector<VarRef> xs;
};

/// Initial feature boxes, indexed like feature_names().
std::vector<std::pair<Value, Value>> initial_feature_domains(ObjectKind k, Value n);

/// Largest n the object models accept. Witness support is exhaustive, so the
/// cap is what keeps a single propagation call bounded.
inline constexpr Value kMaxModelN = 16;

/// Declares featvars (initial boxes) then xs. Throws Error(InvalidArgument)
/// for n outside [1, kMaxModelN] (Partition) or [0, kMaxModelN] (BinSeq).
VarLayout declare_object(Model& model, ObjectKind k, Value n);

/// featvars = (P, Mmin, Mmax, rangeM, S), xs = part label of each element.
PostResult post_partition(Model& model, std::span<const VarRef> featvars, std::span<const VarRef> xs);
/// featvars = (N1, G, Gmin, Gmax, rangeG, GS, Dmin, Dmax, rangeD, DS), xs = the bits.
PostResult post_binseq(Model& model, std::span<const VarRef> featvars, std::span<const VarRef> xs);

PostResult post_object(Model& model, ObjectKind k, const VarLayout& layout);

} // namespace boundforge

#endif
