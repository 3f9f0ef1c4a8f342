#include "propagators.hpp"

#include "boundforge/arith.hpp"
#include "boundforge/error.hpp"

#include <algorithm>
#include <utility>

namespace boundforge::detail {
namespace {

class CompareConstProp final : public Propagator {
public:
    explicit CompareConstProp(CompareConst c)
        : c_(c)
    {
    }
    ConstraintKind kind() const override { return ConstraintKind::Compare; }
    std::vector<VarRef> scope() const override { return {c_.x}; }
    bool idempotent() const override { return true; }

    bool propagate(Model& m) override
    {
        switch (c_.rel) {
        case Relation::Eq: return m.assign(c_.x, c_.c);
        case Relation::Ne: return m.remove_value(c_.x, c_.c);
        case Relation::Le: return m.set_max(c_.x, c_.c);
        case Relation::Lt: return m.set_max(c_.x, c_.c - 1);
        case Relation::Ge: return m.set_min(c_.x, c_.c);
        case Relation::Gt: return m.set_min(c_.x, c_.c + 1);
        }
        return true;
    }

private:
    CompareConst c_;
};

class CompareVarsProp final : public Propagator {
public:
    explicit CompareVarsProp(CompareVars c)
        : c_(c)
    {
    }
    ConstraintKind kind() const override { return ConstraintKind::Compare; }
    std::vector<VarRef> scope() const override { return {c_.x, c_.y}; }

    bool propagate(Model& m) override
    {
        const VarRef x = c_.x;
        const VarRef y = c_.y;
        switch (c_.rel) {
        case Relation::Eq: {
            for (auto v : m.dom(x).values())
                if (!m.dom(y).contains(v) && !m.remove_value(x, v))
                    return false;
            for (auto v : m.dom(y).values())
                if (!m.dom(x).contains(v) && !m.remove_value(y, v))
                    return false;
            return true;
        }
        case Relation::Ne:
            if (m.fixed(x) && !m.remove_value(y, m.value(x)))
                return false;
            if (m.fixed(y) && !m.remove_value(x, m.value(y)))
                return false;
            return true;
        case Relation::Le: return m.set_max(x, m.dom(y).max()) && m.set_min(y, m.dom(x).min());
        case Relation::Lt: return m.set_max(x, m.dom(y).max() - 1) && m.set_min(y, m.dom(x).min() + 1);
        case Relation::Ge: return m.set_min(x, m.dom(y).min()) && m.set_max(y, m.dom(x).max());
        case Relation::Gt: return m.set_min(x, m.dom(y).min() + 1) && m.set_max(y, m.dom(x).max() - 1);
        }
        return true;
    }

private:
    CompareVars c_;
};

/// Bounds-consistent sum(a_i * x_i) <= c, turned into >= or = by the caller
/// through sign flips.
class LinearProp final : public Propagator {
public:
    explicit LinearProp(Linear l)
        : l_(std::move(l))
    {
    }
    ConstraintKind kind() const override { return ConstraintKind::Linear; }
    std::vector<VarRef> scope() const override { return l_.vars; }
    bool idempotent() const override { return true; }

    bool propagate(Model& m) override
    {
        bool again = true;
        while (again) {
            again = false;
            if (l_.rel == Relation::Le || l_.rel == Relation::Eq)
                if (!tighten(m, 1, again))
                    return false;
            if (l_.rel == Relation::Ge || l_.rel == Relation::Eq)
                if (!tighten(m, -1, again))
                    return false;
        }
        return true;
    }

private:
    // sign * sum(a_i x_i) <= sign * rhs
    bool tighten(Model& m, Value sign, bool& changed)
    {
        const auto k = l_.vars.size();
        Value min_sum = 0;
        for (std::size_t i = 0; i < k; ++i)
            min_sum += term_min(m, i, sign);
        const Value cap = sign * l_.rhs;
        if (min_sum > cap)
            return false;
        for (std::size_t i = 0; i < k; ++i) {
            const Value a = sign * l_.coeffs[i];
            if (a == 0)
                continue;
            const Value slack = cap - (min_sum - term_min(m, i, sign));
            const VarRef x = l_.vars[i];
            const Value old_min = term_min(m, i, sign);
            const Value lo = m.dom(x).min();
            const Value hi = m.dom(x).max();
            bool ok = a > 0 ? m.set_max(x, floor_div(slack, a)) : m.set_min(x, ceil_div(slack, a));
            if (!ok)
                return false;
            min_sum += term_min(m, i, sign) - old_min;
            if (m.dom(x).min() != lo || m.dom(x).max() != hi)
                changed = true;
        }
        return true;
    }

    Value term_min(const Model& m, std::size_t i, Value sign) const
    {
        const Value a = sign * l_.coeffs[i];
        const auto& d = m.dom(l_.vars[i]);
        return a >= 0 ? a * d.min() : a * d.max();
    }

    Linear l_;
};

class CheckerProp final : public Propagator {
public:
    explicit CheckerProp(Checker c)
        : c_(std::move(c))
    {
    }
    ConstraintKind kind() const override { return ConstraintKind::Checker; }
    std::vector<VarRef> scope() const override { return c_.vars; }
    bool idempotent() const override { return true; }

    bool propagate(Model& m) override
    {
        std::vector<Value> vals;
        vals.reserve(c_.vars.size());
        for (auto v : c_.vars) {
            if (!m.fixed(v))
                return true;
            vals.push_back(m.value(v));
        }
        return c_.accept(vals);
    }

private:
    Checker c_;
};

class LexGreaterProp final : public Propagator {
public:
    LexGreaterProp(std::vector<VarRef> vars, std::vector<Value> tuple)
        : vars_(std::move(vars))
        , tuple_(std::move(tuple))
    {
    }
    ConstraintKind kind() const override { return ConstraintKind::LexGreater; }
    std::vector<VarRef> scope() const override { return vars_; }
    bool idempotent() const override { return true; }

    bool propagate(Model& m) override
    {
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            const VarRef x = vars_[i];
            const Value t = tuple_[i];
            if (!m.set_min(x, t))
                return false;
            if (m.dom(x).min() > t)
                return true;
            if (!suffix_can_exceed(m, i + 1))
                return m.set_min(x, t + 1);
            if (!m.fixed(x))
                return true;
        }
        // Every position is pinned to the tuple: equal, not greater.
        return false;
    }

private:
    bool suffix_can_exceed(const Model& m, std::size_t from) const
    {
        for (std::size_t j = from; j < vars_.size(); ++j) {
            const Value hi = m.dom(vars_[j]).max();
            if (hi > tuple_[j])
                return true;
            if (hi < tuple_[j])
                return false;
        }
        return false;
    }

    std::vector<VarRef> vars_;
    std::vector<Value> tuple_;
};

} // namespace

std::unique_ptr<Propagator> make_propagator(const ConstraintSpec& spec)
{
    struct Visitor {
        std::unique_ptr<Propagator> operator()(const CompareConst& c) const
        {
            return std::make_unique<CompareConstProp>(c);
        }
        std::unique_ptr<Propagator> operator()(const CompareVars& c) const
        {
            return std::make_unique<CompareVarsProp>(c);
        }
        std::unique_ptr<Propagator> operator()(const Linear& l) const
        {
            if (l.coeffs.size() != l.vars.size())
                throw Error(ErrorCode::InvalidArgument, "linear: coefficient/variable count mismatch");
            if (l.rel != Relation::Eq && l.rel != Relation::Le && l.rel != Relation::Ge)
                throw Error(ErrorCode::UnsupportedConstraint,
                            "linear: only =, <= and >= are propagated");
            return std::make_unique<LinearProp>(l);
        }
        std::unique_ptr<Propagator> operator()(const Checker& c) const
        {
            if (!c.accept)
                throw Error(ErrorCode::InvalidArgument, "checker without a predicate");
            return std::make_unique<CheckerProp>(c);
        }
    };
    return std::visit(Visitor{}, spec);
}

std::unique_ptr<Propagator> make_lex_greater(std::span<const VarRef> vars, std::span<const Value> tuple)
{
    if (vars.size() != tuple.size())
        throw Error(ErrorCode::InvalidArgument,
                    "lex constraint: " + std::to_string(vars.size()) + " variables against a tuple of " +
                        std::to_string(tuple.size()));
    return std::make_unique<LexGreaterProp>(std::vector<VarRef>(vars.begin(), vars.end()),
                                            std::vector<Value>(tuple.begin(), tuple.end()));
}

} // namespace boundforge::detail
