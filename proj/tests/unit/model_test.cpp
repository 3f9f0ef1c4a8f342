#include "boundforge/error.hpp"
#include "boundforge/model.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace boundforge;

namespace {

std::vector<Value> vals(const Model& m, VarRef v) { return m.dom(v).values(); }

Checker accept_only(VarRef v, Value x)
{
    return Checker{{v}, [x](std::span<const Value> t) { return t[0] == x; }};
}

} // namespace

TEST(Model, PostEqualityAlreadySatisfied)
{
    Model m;
    auto a = m.new_var(1, 1);
    auto b = m.new_var(1, 1);
    auto r = m.post(CompareVars{a, Relation::Eq, b});
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.handle().kind, ConstraintKind::Compare);
    EXPECT_EQ(vals(m, a), std::vector<Value>{1});
}

TEST(Model, FailedPostLeavesNoResidue)
{
    Model m;
    auto a = m.new_var(1, 1);
    auto b = m.new_var(2, 2);
    auto before = m.snapshot();
    auto r = m.post(CompareVars{a, Relation::Eq, b});
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(m.snapshot(), before);
    EXPECT_EQ(m.num_constraints(), 0u);
    EXPECT_THROW(r.handle(), Error);
}

TEST(Model, IntervalPruning)
{
    Model m;
    auto a = m.new_var(1, 3);
    ASSERT_TRUE(m.post(CompareConst{a, Relation::Le, 2}));
    EXPECT_EQ(vals(m, a), (std::vector<Value>{1, 2}));
}

TEST(Model, LexSingleVariable)
{
    Model m;
    auto a = m.new_var(0, 1);
    std::vector<VarRef> xs{a};
    std::vector<Value> t0{0};
    ASSERT_TRUE(m.post_lex_greater(xs, t0));
    EXPECT_EQ(vals(m, a), std::vector<Value>{1});

    Model m2;
    auto b = m2.new_var(0, 1);
    std::vector<VarRef> ys{b};
    std::vector<Value> t1{1};
    EXPECT_FALSE(m2.post_lex_greater(ys, t1));
}

TEST(Model, LexTwoVariablesSolutionSet)
{
    Model m;
    std::vector<VarRef> xs{m.new_var(0, 1), m.new_var(0, 1)};
    std::vector<Value> t{0, 1};
    ASSERT_TRUE(m.post_lex_greater(xs, t));
    std::vector<std::vector<Value>> sols;
    for (;;) {
        auto r = m.labeling(xs, {});
        if (r.finished)
            break;
        sols.push_back(r.sol);
        if (!m.post_lex_greater(xs, r.sol))
            break;
    }
    EXPECT_EQ(sols, (std::vector<std::vector<Value>>{{1, 0}, {1, 1}}));
}

TEST(Model, LexLengthMismatch)
{
    Model m;
    std::vector<VarRef> xs{m.new_var(0, 1)};
    std::vector<Value> t{0, 0};
    try {
        m.post_lex_greater(xs, t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
}

TEST(Model, RetractSinglePost)
{
    Model m;
    auto a = m.new_var(0, 3);
    auto before = m.snapshot();
    auto mk = m.mark();
    ASSERT_TRUE(m.post(CompareConst{a, Relation::Le, 1}));
    m.retract_to(mk);
    EXPECT_EQ(m.snapshot(), before);
    EXPECT_EQ(m.num_constraints(), 0u);
}

TEST(Model, RetractAfterFailedPostIsNoop)
{
    Model m;
    auto a = m.new_var(0, 3);
    auto before = m.snapshot();
    auto mk = m.mark();
    EXPECT_FALSE(m.post(CompareConst{a, Relation::Gt, 3}));
    EXPECT_EQ(m.snapshot(), before);
    m.retract_to(mk);
    EXPECT_EQ(m.snapshot(), before);
}

TEST(Model, RetractTwoPosts)
{
    Model m;
    auto b = m.new_var(0, 4);
    auto before = m.snapshot();
    auto mk = m.mark();
    ASSERT_TRUE(m.post(CompareConst{b, Relation::Ge, 2}));
    ASSERT_TRUE(m.post(CompareConst{b, Relation::Le, 2}));
    EXPECT_TRUE(m.fixed(b));
    m.retract_to(mk);
    EXPECT_EQ(m.snapshot(), before);
}

TEST(Model, StaleAndForeignMarks)
{
    Model m;
    auto a = m.new_var(0, 5);
    auto outer = m.mark();
    ASSERT_TRUE(m.post(CompareConst{a, Relation::Le, 4}));
    auto inner = m.mark();
    ASSERT_TRUE(m.post(CompareConst{a, Relation::Le, 3}));
    m.retract_to(outer);
    EXPECT_EQ(m.dom(a).max(), 5);
    try {
        m.retract_to(inner);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidMark);
    }
    // The mark retracted to stays usable.
    ASSERT_TRUE(m.post(CompareConst{a, Relation::Le, 2}));
    m.retract_to(outer);
    EXPECT_EQ(m.dom(a).max(), 5);

    Model other;
    EXPECT_THROW(other.retract_to(outer), Error);
}

TEST(Model, LabelingUnconstrained)
{
    Model m;
    std::vector<VarRef> a{m.new_var(0, 1)};
    auto r = m.labeling(a, {});
    EXPECT_EQ(r.nback, 0u);
    EXPECT_FALSE(r.finished);
    EXPECT_EQ(r.sol, std::vector<Value>{0});
}

TEST(Model, LabelingAfterPropagation)
{
    Model m;
    std::vector<VarRef> a{m.new_var(0, 1)};
    ASSERT_TRUE(m.post(CompareConst{a[0], Relation::Ge, 1}));
    auto r = m.labeling(a, {});
    EXPECT_EQ(r.nback, 0u);
    EXPECT_FALSE(r.finished);
    EXPECT_EQ(r.sol, std::vector<Value>{1});
}

TEST(Model, LabelingCheckerCountsLeafFailure)
{
    Model m;
    std::vector<VarRef> a{m.new_var(0, 1)};
    ASSERT_TRUE(m.post(accept_only(a[0], 1)));
    auto before = m.snapshot();
    auto r = m.labeling(a, {});
    EXPECT_EQ(r.nback, 1u);
    EXPECT_FALSE(r.finished);
    EXPECT_EQ(r.sol, std::vector<Value>{1});
    EXPECT_EQ(m.snapshot(), before);
}

TEST(Model, ExhaustionCountsEveryFailedDecision)
{
    Model m;
    std::vector<VarRef> xs{m.new_var(0, 1), m.new_var(0, 2)};
    ASSERT_TRUE(m.post(Checker{xs, [](std::span<const Value>) { return false; }}));
    auto r = m.labeling(xs, {});
    EXPECT_TRUE(r.finished);
    EXPECT_TRUE(r.sol.empty());
    // 3 leaves under each of 2 first-level values, plus the 2 first-level retractions.
    EXPECT_EQ(r.nback, 8u);
}

TEST(Model, BacktrackLimitTruncates)
{
    Model m;
    std::vector<VarRef> xs{m.new_var(0, 1), m.new_var(0, 2)};
    ASSERT_TRUE(m.post(Checker{xs, [](std::span<const Value>) { return false; }}));
    auto before = m.snapshot();
    auto r = m.labeling(xs, {}, LabelOptions{5});
    EXPECT_TRUE(r.truncated);
    EXPECT_FALSE(r.finished);
    EXPECT_EQ(r.nback, 6u);
    EXPECT_EQ(m.snapshot(), before);

    auto full = m.labeling(xs, {}, LabelOptions{8});
    EXPECT_FALSE(full.truncated);
    EXPECT_EQ(full.nback, 8u);
}

TEST(Model, LinearEqualityReachesFixpoint)
{
    Model m;
    auto x = m.new_var(0, 10);
    auto y = m.new_var(0, 10);
    auto z = m.new_var(0, 10);
    ASSERT_TRUE(m.post(Linear{{1, 1, 1}, {x, y, z}, Relation::Eq, 3}));
    EXPECT_EQ(m.dom(x).max(), 3);
    ASSERT_TRUE(m.post(CompareConst{x, Relation::Ge, 2}));
    ASSERT_TRUE(m.post(CompareConst{y, Relation::Ge, 1}));
    EXPECT_TRUE(m.fixed(z));
    EXPECT_EQ(m.value(z), 0);

    auto d = m.new_var(0, 20);
    auto e = m.new_var(0, 20);
    // d - e = 5 with e <= 3
    ASSERT_TRUE(m.post(Linear{{1, -1}, {d, e}, Relation::Eq, 5}));
    ASSERT_TRUE(m.post(CompareConst{e, Relation::Le, 3}));
    EXPECT_EQ(m.dom(d).min(), 5);
    EXPECT_EQ(m.dom(d).max(), 8);
}

TEST(Model, UnsupportedLinearRelation)
{
    Model m;
    auto x = m.new_var(0, 3);
    try {
        m.post(Linear{{1}, {x}, Relation::Ne, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedConstraint);
    }
}

TEST(Model, InvalidVarInScope)
{
    Model m;
    VarRef ghost{7};
    EXPECT_THROW(m.post(CompareConst{ghost, Relation::Le, 1}), Error);
}

namespace {

struct RandomModel {
    std::vector<std::pair<Value, Value>> boxes;
    std::vector<Linear> sums;
    std::vector<CompareVars> cmps;
};

bool satisfies(const RandomModel& rm, const std::vector<Value>& t)
{
    for (const auto& l : rm.sums) {
        Value s = 0;
        for (std::size_t i = 0; i < l.vars.size(); ++i)
            s += l.coeffs[i] * t[l.vars[i].id];
        if (l.rel == Relation::Le && s > l.rhs)
            return false;
        if (l.rel == Relation::Ge && s < l.rhs)
            return false;
        if (l.rel == Relation::Eq && s != l.rhs)
            return false;
    }
    for (const auto& c : rm.cmps) {
        const Value a = t[c.x.id];
        const Value b = t[c.y.id];
        bool ok = true;
        switch (c.rel) {
        case Relation::Eq: ok = a == b; break;
        case Relation::Ne: ok = a != b; break;
        case Relation::Le: ok = a <= b; break;
        case Relation::Lt: ok = a < b; break;
        case Relation::Ge: ok = a >= b; break;
        case Relation::Gt: ok = a > b; break;
        }
        if (!ok)
            return false;
    }
    return true;
}

std::optional<std::vector<Value>> smallest(const RandomModel& rm)
{
    std::vector<Value> t;
    for (auto [lo, hi] : rm.boxes)
        t.push_back(lo);
    for (;;) {
        if (satisfies(rm, t))
            return t;
        std::size_t i = t.size();
        while (i > 0) {
            --i;
            if (t[i] < rm.boxes[i].second) {
                ++t[i];
                for (auto j = i + 1; j < t.size(); ++j)
                    t[j] = rm.boxes[j].first;
                break;
            }
            if (i == 0)
                return std::nullopt;
        }
    }
}

} // namespace

TEST(Model, LabelingFindsLexSmallestAgainstBruteForce)
{
    std::mt19937_64 rng(20261014);
    int solved = 0;
    for (int round = 0; round < 400; ++round) {
        RandomModel rm;
        const int nv = 2 + static_cast<int>(rng() % 3);
        int budget = 12;
        for (int i = 0; i < nv; ++i) {
            const Value lo = static_cast<Value>(rng() % 3) - 1;
            const Value w = std::min<Value>(budget - (nv - i - 1), 1 + static_cast<Value>(rng() % 4));
            rm.boxes.emplace_back(lo, lo + w - 1);
            budget -= static_cast<int>(w);
        }
        const int nc = 1 + static_cast<int>(rng() % 3);
        for (int c = 0; c < nc; ++c) {
            const auto x = VarRef{static_cast<std::uint32_t>(rng() % nv)};
            auto y = VarRef{static_cast<std::uint32_t>(rng() % nv)};
            if (y == x)
                y.id = (y.id + 1) % nv;
            if (rng() % 2) {
                const Relation rels[] = {Relation::Le, Relation::Ge, Relation::Eq};
                rm.sums.push_back(Linear{{static_cast<Value>(rng() % 3) - 1, 1 + static_cast<Value>(rng() % 2)},
                                         {x, y},
                                         rels[rng() % 3],
                                         static_cast<Value>(rng() % 5) - 1});
            } else {
                const Relation rels[] = {Relation::Eq, Relation::Ne, Relation::Le, Relation::Lt, Relation::Ge,
                                         Relation::Gt};
                rm.cmps.push_back(CompareVars{x, rels[rng() % 6], y});
            }
        }

        Model m;
        std::vector<VarRef> vars;
        for (auto [lo, hi] : rm.boxes)
            vars.push_back(m.new_var(lo, hi));
        bool alive = true;
        for (const auto& l : rm.sums)
            alive = alive && m.post(l).ok();
        for (const auto& c : rm.cmps)
            alive = alive && m.post(c).ok();

        const auto expect = smallest(rm);
        if (!alive) {
            EXPECT_FALSE(expect.has_value()) << "round " << round;
            continue;
        }
        auto r = m.labeling(vars, {});
        if (expect) {
            ++solved;
            EXPECT_FALSE(r.finished) << "round " << round;
            EXPECT_EQ(r.sol, *expect) << "round " << round;
        } else {
            EXPECT_TRUE(r.finished) << "round " << round;
        }
        auto again = m.labeling(vars, {});
        EXPECT_EQ(again.nback, r.nback);
        EXPECT_EQ(again.sol, r.sol);
    }
    EXPECT_GT(solved, 100);
}
