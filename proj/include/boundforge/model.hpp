#ifndef BOUNDFORGE_MODEL_HPP
#define BOUNDFORGE_MODEL_HPP

#include "boundforge/domain.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace boundforge {

struct VarRef {
    std::uint32_t id = 0;
    friend auto operator<=>(const VarRef&, const VarRef&) = default;
};

enum class ConstraintKind { Compare, Linear, LexGreater, Checker, Partition, BinSeq, Bound };

struct ConstraintHandle {
    std::uint32_t id = 0;
    ConstraintKind kind = ConstraintKind::Compare;
    std::vector<VarRef> scope;
};

/// Outcome of a post. Failure is an ordinary result: the model is left exactly
/// as it was before the call.
class PostResult {
public:
    PostResult() = default;
    explicit PostResult(ConstraintHandle h)
        : handle_(std::move(h))
    {
    }
    static PostResult failed() { return {}; }

    bool ok() const noexcept { return handle_.has_value(); }
    explicit operator bool() const noexcept { return ok(); }
    const ConstraintHandle& handle() const;

private:
    std::optional<ConstraintHandle> handle_;
};

struct TrailMark {
    std::uint64_t model = 0;
    std::uint64_t serial = 0;
    std::size_t depth = 0;
};

struct LabelOptions {
    /// Abort once more than this many backtracks have been spent. The result
    /// then has `truncated` set and its nback is max_backtracks + 1.
    std::optional<std::uint64_t> max_backtracks;
};

struct LabelResult {
    std::uint64_t nback = 0;
    bool finished = false;
    /// Values of featvars in the solution found; empty when finished.
    std::vector<Value> sol;
    /// Values of xs in the same solution.
    std::vector<Value> witness;
    bool truncated = false;
};

class Model;

/// A propagator prunes domains through the Model's mutators and returns false
/// on failure. Propagators are stateless between calls; everything they need is
/// read back from the domains, so retraction only has to restore domains.
class Propagator {
public:
    virtual ~Propagator() = default;
    virtual ConstraintKind kind() const = 0;
    virtual std::vector<VarRef> scope() const = 0;
    virtual bool propagate(Model& model) = 0;
    /// When true, the model skips re-running the propagator on its own prunings.
    virtual bool idempotent() const { return false; }
};

enum class Relation { Eq, Ne, Le, Lt, Ge, Gt };

/// x REL constant
struct CompareConst {
    VarRef x;
    Relation rel = Relation::Eq;
    Value c = 0;
};

/// x REL y
struct CompareVars {
    VarRef x;
    Relation rel = Relation::Eq;
    VarRef y;
};

/// sum(coeffs[i] * vars[i]) REL rhs, bounds-consistent. Only Eq, Le and Ge are
/// supported.
struct Linear {
    std::vector<Value> coeffs;
    std::vector<VarRef> vars;
    Relation rel = Relation::Eq;
    Value rhs = 0;
};

/// Ground test evaluated once every scope variable is fixed; no pruning before.
struct Checker {
    std::vector<VarRef> vars;
    std::function<bool(std::span<const Value>)> accept;
};

using ConstraintSpec = std::variant<CompareConst, CompareVars, Linear, Checker>;

struct ModelStats {
    std::uint64_t posts = 0;
    std::uint64_t failed_posts = 0;
    std::uint64_t labelings = 0;
};

/// Trail-based finite-domain store. Single-threaded; separate instances share
/// nothing.
class Model {
public:
    Model();
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;
    Model(Model&&) noexcept;
    Model& operator=(Model&&) noexcept;
    ~Model();

    /// Throws Error(InvalidDomain) when lo > hi.
    VarRef new_var(Value lo, Value hi);
    std::size_t num_vars() const noexcept { return domains_.size(); }
    const Domain& dom(VarRef v) const;
    bool fixed(VarRef v) const { return dom(v).fixed(); }
    Value value(VarRef v) const;

    // Mutators for propagators. They return false on a domain wipe-out.
    bool set_min(VarRef v, Value lo);
    bool set_max(VarRef v, Value hi);
    bool remove_value(VarRef v, Value x);
    bool assign(VarRef v, Value x);

    PostResult post(const ConstraintSpec& spec);
    PostResult post(std::unique_ptr<Propagator> prop);
    /// Posts several propagators as one constraint: all of them or none.
    PostResult post_group(ConstraintKind kind, std::vector<std::unique_ptr<Propagator>> props);
    /// vars >lex tuple. Throws Error(InvalidArgument) on a length mismatch.
    PostResult post_lex_greater(std::span<const VarRef> vars, std::span<const Value> tuple);

    TrailMark mark();
    /// Throws Error(InvalidMark) for a mark from another model or one that has
    /// been invalidated by retracting to an earlier mark.
    void retract_to(const TrailMark& mark);

    /// Left-to-right labeling of featvars then xs, smallest value first.
    LabelResult labeling(std::span<const VarRef> featvars, std::span<const VarRef> xs,
                         LabelOptions options = {});

    std::vector<Domain> snapshot() const { return domains_; }
    std::size_t num_constraints() const noexcept { return props_.size(); }
    std::size_t trail_depth() const noexcept { return trail_.size(); }
    const ModelStats& stats() const noexcept { return stats_; }

private:
    struct PropEntry {
        std::unique_ptr<Propagator> prop;
        std::vector<VarRef> scope;
    };
    struct MarkEntry {
        std::uint64_t serial;
        std::size_t trail;
        std::size_t props;
    };
    struct TrailEntry {
        std::uint32_t var;
        Domain old;
    };

    Domain& writable(VarRef v);
    bool changed(VarRef v);
    bool run_queue();
    void clear_queue();
    void attach(std::unique_ptr<Propagator> prop);
    void restore(std::size_t trail_size, std::size_t props_size);
    void drop_top_mark();
    bool search(std::span<const VarRef> vars, std::size_t index, std::uint64_t& nback,
                const std::optional<std::uint64_t>& limit, bool& truncated);

    std::uint64_t id_;
    std::uint64_t next_serial_ = 1;
    std::uint32_t next_constraint_ = 1;
    std::vector<Domain> domains_;
    std::vector<TrailEntry> trail_;
    std::vector<PropEntry> props_;
    std::vector<std::vector<std::uint32_t>> watchers_;
    std::vector<MarkEntry> marks_;
    std::vector<std::uint32_t> queue_;
    std::vector<char> queued_;
    std::optional<std::uint32_t> running_;
    std::vector<std::uint64_t> saved_stamp_;
    ModelStats stats_;
};

} // namespace boundforge

#endif
