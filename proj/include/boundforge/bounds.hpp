#ifndef BOUNDFORGE_BOUNDS_HPP
#define BOUNDFORGE_BOUNDS_HPP

#include "boundforge/model.hpp"
#include "boundforge/objects.hpp"

#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace boundforge {

/// Integer expression over the features of one object and n.
class Expr {
public:
    enum class Op { Const, Feature, N, Add, Sub, Mul, FloorDiv, Mod, Min, Max, Square, Iverson, Cases, Named };
    struct Node;

    Expr() = default;
    explicit Expr(std::shared_ptr<const Node> node)
        : node_(std::move(node))
    {
    }
    const Node& node() const { return *node_; }
    explicit operator bool() const noexcept { return node_ != nullptr; }

private:
    std::shared_ptr<const Node> node_;
};

class Cond {
public:
    enum class Op { Eq, Ne, Lt, Le, Gt, Ge, And };
    struct Node;

    Cond() = default;
    explicit Cond(std::shared_ptr<const Node> node)
        : node_(std::move(node))
    {
    }
    const Node& node() const { return *node_; }

private:
    std::shared_ptr<const Node> node_;
};

struct Case {
    Cond when;
    Expr then;
};

struct Expr::Node {
    Op op = Op::Const;
    Value value = 0;         // Const
    std::size_t feature = 0; // Feature
    std::string name;        // Named
    std::vector<Expr> args;
    std::vector<Cond> conds; // Iverson: one
    std::vector<Case> cases; // Cases: guards must be exhaustive and disjoint
};

struct Cond::Node {
    Op op = Op::Eq;
    Expr lhs;
    Expr rhs;
    std::vector<Cond> parts; // And
};

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);

namespace ex {

Expr lit(Value v);
Expr feat(std::size_t index);
Expr n();
Expr floordiv(Expr a, Expr b);
Expr mod(Expr a, Expr b);
Expr min(Expr a, Expr b);
Expr max(Expr a, Expr b);
Expr sq(Expr a);
Expr iverson(Cond c);
Expr cases(std::vector<Case> cs);
Expr named(std::string name, Expr e);

Cond eq(Expr a, Expr b);
Cond ne(Expr a, Expr b);
Cond lt(Expr a, Expr b);
Cond le(Expr a, Expr b);
Cond gt(Expr a, Expr b);
Cond ge(Expr a, Expr b);
Cond all(std::vector<Cond> cs);

} // namespace ex

/// Throws Error(CatalogDefinition) when no case or more than one case of a
/// split matches, or on division by zero.
Value eval(const Expr& e, std::span<const Value> features, Value n);
bool eval(const Cond& c, std::span<const Value> features, Value n);

/// Prefix rendering, e.g. "(+ (sq MID) SMIN)" with features by name.
std::string to_prefix(const Expr& e, ObjectKind k);
std::string to_prefix(const Cond& c, ObjectKind k);

void collect_features(const Expr& e, std::set<std::size_t>& out);

enum class Direction { Upper, Lower };
std::string_view to_string(Direction d) noexcept;

struct BoundCandidate {
    std::string id;
    ObjectKind object = ObjectKind::Partition;
    std::size_t target = 0;
    Direction direction = Direction::Upper;
    Expr rhs;
    /// Human-readable statement, e.g. "DS >= Dmax^2".
    std::string label;

    std::string_view target_name() const { return feature_names(object)[target]; }
    /// Features the rhs reads, ascending.
    std::vector<std::size_t> inputs() const;
};

/// The 20 bounds: 3 for Partition followed by 17 for BinSeq.
const std::vector<BoundCandidate>& catalog();
/// Throws Error(InvalidArgument) for an unknown id.
const BoundCandidate& find_bound(std::string_view id);
std::vector<BoundCandidate> catalog_for(ObjectKind k);

/// Vacuous candidate "feature <= its initial maximum", id "decoy:<feature>".
/// Throws Error(InvalidArgument) for an unknown feature name.
BoundCandidate make_decoy(ObjectKind k, std::string_view feature);

struct BoundVerdict {
    bool holds = false;
    Value lhs = 0;
    Value rhs = 0;
    Value slack = 0;
};

/// features are indexed like feature_names(bound.object).
Value eval_rhs(const BoundCandidate& b, std::span<const Value> features, Value n);
BoundVerdict verify_on(const BoundCandidate& b, std::span<const Value> features, Value n);
BoundVerdict verify_on(const BoundCandidate& b, const PartitionFeatures& f);
BoundVerdict verify_on(const BoundCandidate& b, const BinSeqFeatures& f);

/// Check-on-fix: once every rhs input is fixed the target is pruned to the
/// bound. A rhs that cannot be evaluated on the fixed inputs (no case matches)
/// only happens on tuples no object has, so it fails the propagation.
/// Throws Error(InvalidArgument) when featvars does not fit the object.
PostResult post_bound(Model& model, const BoundCandidate& b, std::span<const VarRef> featvars, Value n);

/// Machine-readable catalog: [{id, object, target, direction, rhs}], rhs in
/// prefix notation.
std::string catalog_json(std::span<const BoundCandidate> bounds, int indent = 2);

} // namespace boundforge

#endif
