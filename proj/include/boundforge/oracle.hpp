#ifndef BOUNDFORGE_ORACLE_HPP
#define BOUNDFORGE_ORACLE_HPP

#include "boundforge/bounds.hpp"
#include "boundforge/objects.hpp"

#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

// Brute-force ground truth. Nothing here goes through the Model, and feature
// tuples are recomputed with code separate from objects.cpp.
namespace boundforge::oracle {

/// Every multiset of positive integers summing to n, each non-increasing, no
/// duplicates, largest first part first. Throws Error(InvalidArgument) for n < 1.
std::vector<PartSizes> enum_partitions(Value n);

/// All 2^n bit lists, ordered by the binary number x_1 + 2 x_2 + ...
class BinSeqs {
public:
    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = std::vector<Value>;
        using difference_type = std::ptrdiff_t;
        using pointer = const value_type*;
        using reference = const value_type&;

        iterator(Value n, std::uint64_t mask);
        reference operator*() const { return bits_; }
        pointer operator->() const { return &bits_; }
        iterator& operator++();
        iterator operator++(int)
        {
            auto t = *this;
            ++*this;
            return t;
        }
        friend bool operator==(const iterator& a, const iterator& b) { return a.mask_ == b.mask_; }

    private:
        void fill();
        Value n_;
        std::uint64_t mask_;
        std::vector<Value> bits_;
    };

    explicit BinSeqs(Value n);
    iterator begin() const { return {n_, 0}; }
    iterator end() const { return {n_, std::uint64_t{1} << n_}; }
    std::uint64_t size() const { return std::uint64_t{1} << n_; }

private:
    Value n_;
};

/// Throws Error(InvalidArgument) outside 0..40.
BinSeqs enum_binseqs(Value n);

/// Tuples in featvar order.
std::vector<Value> partition_tuple(const PartSizes& sizes);
std::vector<Value> binseq_tuple(std::span<const Value> bits);
std::set<std::vector<Value>> feasible_tuples(ObjectKind k, Value n);

struct Violation {
    std::vector<Value> features;
    Value lhs = 0;
    Value rhs = 0;
};

/// One row per n.
struct AuditRow {
    Value n = 0;
    std::uint64_t instances = 0;
    std::uint64_t violations = 0;
    std::uint64_t witnesses = 0;
    std::optional<Value> min_slack;
};

struct AuditReport {
    std::string bound_id;
    std::uint64_t instances = 0;
    std::vector<Violation> violations;
    /// Distinct slack-0 feature tuples, per n.
    std::map<Value, std::vector<std::vector<Value>>> witnesses;
    std::vector<AuditRow> rows;
};

/// Every object of each size in ns, through verify_on. Throws
/// Error(InvalidArgument) for an n the enumerators reject.
AuditReport audit(const BoundCandidate& b, std::span<const Value> ns);
AuditReport audit(const BoundCandidate& b, Value n);

/// {"audits":[{bound, instances, violations:[...], rows:[...]}], "violations": total}
std::string audit_json(std::span<const AuditReport> reports);
/// Header: bound,n,instances,violations,witnesses,min_slack
std::string audit_csv(std::span<const AuditReport> reports);

/// (n - P + 1)^2 + P - 1. Throws Error(InvalidArgument) unless 1 <= P <= n.
Value max_sum_squares(Value n, Value P);
/// Largest S over partitions of n into exactly P parts, by enumeration.
Value brute_max_sum_squares(Value n, Value P);

/// (floor(R/range), P - ceil(R/range)) with R = n - P*Mmin, range = Mmax - Mmin.
/// Throws Error(InvalidArgument) for range <= 0 or R < 0.
std::pair<Value, Value> omax_omin_bounds(Value n, Value P, Value Mmin, Value Mmax);

/// Parts of size Mmax and of size Mmin.
std::pair<Value, Value> omax_omin(const PartSizes& sizes);

// Properties of partitions of n elements. Each returns the offending
// partitions; empty means the property holds.

/// A partition with two parts strictly between Mmin and Mmax whose S is already
/// the largest among partitions with the same (P, Mmin, Mmax).
std::vector<PartSizes> lemma_interior_pair_counterexamples(Value n);
/// An S-maximal partition with range > 0 whose interior parts are not exactly
/// [R mod range > 0] parts of size Mmin + (R mod range).
std::vector<PartSizes> lemma_interior_part_counterexamples(Value n);

struct CountBoundCheck {
    Value P = 0, Mmin = 0, Mmax = 0;
    Value omax_ub = 0, omin_ub = 0;
    Value omax_seen = 0, omin_seen = 0;
};
struct RangeTightness {
    Value P = 0;
    /// Mmin for P-RANGE-UB1, Mmax for P-RANGE-UB2.
    Value key = 0;
    Value bound = 0;
    /// Largest rangeM among partitions with this (P, key).
    Value best = 0;
    /// The extremal partition built directly from (n, P, key).
    PartSizes construction;
    /// construction has this (P, key) and rangeM == bound.
    bool construction_ok = false;
};
/// One entry per (P, key) some partition of n has. Throws
/// Error(InvalidArgument) for a bound other than the two range bounds.
std::vector<RangeTightness> range_tightness(const BoundCandidate& b, Value n);

/// One entry per feasible (P, Mmin, Mmax) with range > 0: the bounds and the
/// largest observed counts.
std::vector<CountBoundCheck> count_bound_checks(Value n);

} // namespace boundforge::oracle

#endif
