#include "boundforge/bounds.hpp"

#include "boundforge/arith.hpp"
#include "boundforge/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace boundforge {

namespace ex {
namespace {

Expr make(Expr::Op op, std::vector<Expr> args)
{
    auto node = std::make_shared<Expr::Node>();
    node->op = op;
    node->args = std::move(args);
    return Expr(std::move(node));
}

Cond compare(Cond::Op op, Expr a, Expr b)
{
    auto node = std::make_shared<Cond::Node>();
    node->op = op;
    node->lhs = std::move(a);
    node->rhs = std::move(b);
    return Cond(std::move(node));
}

} // namespace

Expr lit(Value v)
{
    auto node = std::make_shared<Expr::Node>();
    node->value = v;
    return Expr(std::move(node));
}

Expr feat(std::size_t index)
{
    auto node = std::make_shared<Expr::Node>();
    node->op = Expr::Op::Feature;
    node->feature = index;
    return Expr(std::move(node));
}

Expr n() { return make(Expr::Op::N, {}); }
Expr floordiv(Expr a, Expr b) { return make(Expr::Op::FloorDiv, {std::move(a), std::move(b)}); }
Expr mod(Expr a, Expr b) { return make(Expr::Op::Mod, {std::move(a), std::move(b)}); }
Expr min(Expr a, Expr b) { return make(Expr::Op::Min, {std::move(a), std::move(b)}); }
Expr max(Expr a, Expr b) { return make(Expr::Op::Max, {std::move(a), std::move(b)}); }
Expr sq(Expr a) { return make(Expr::Op::Square, {std::move(a)}); }

Expr iverson(Cond c)
{
    auto node = std::make_shared<Expr::Node>();
    node->op = Expr::Op::Iverson;
    node->conds.push_back(std::move(c));
    return Expr(std::move(node));
}

Expr cases(std::vector<Case> cs)
{
    auto node = std::make_shared<Expr::Node>();
    node->op = Expr::Op::Cases;
    node->cases = std::move(cs);
    return Expr(std::move(node));
}

Expr named(std::string name, Expr e)
{
    auto node = std::make_shared<Expr::Node>();
    node->op = Expr::Op::Named;
    node->name = std::move(name);
    node->args.push_back(std::move(e));
    return Expr(std::move(node));
}

Cond eq(Expr a, Expr b) { return compare(Cond::Op::Eq, std::move(a), std::move(b)); }
Cond ne(Expr a, Expr b) { return compare(Cond::Op::Ne, std::move(a), std::move(b)); }
Cond lt(Expr a, Expr b) { return compare(Cond::Op::Lt, std::move(a), std::move(b)); }
Cond le(Expr a, Expr b) { return compare(Cond::Op::Le, std::move(a), std::move(b)); }
Cond gt(Expr a, Expr b) { return compare(Cond::Op::Gt, std::move(a), std::move(b)); }
Cond ge(Expr a, Expr b) { return compare(Cond::Op::Ge, std::move(a), std::move(b)); }

Cond all(std::vector<Cond> cs)
{
    auto node = std::make_shared<Cond::Node>();
    node->op = Cond::Op::And;
    node->parts = std::move(cs);
    return Cond(std::move(node));
}

} // namespace ex

Expr operator+(Expr a, Expr b) { return ex::make(Expr::Op::Add, {std::move(a), std::move(b)}); }
Expr operator-(Expr a, Expr b) { return ex::make(Expr::Op::Sub, {std::move(a), std::move(b)}); }
Expr operator*(Expr a, Expr b) { return ex::make(Expr::Op::Mul, {std::move(a), std::move(b)}); }

Value eval(const Expr& e, std::span<const Value> f, Value n)
{
    const auto& x = e.node();
    const auto arg = [&](std::size_t i) { return eval(x.args[i], f, n); };
    switch (x.op) {
    case Expr::Op::Const: return x.value;
    case Expr::Op::Feature:
        if (x.feature >= f.size())
            throw Error(ErrorCode::CatalogDefinition, "feature index " + std::to_string(x.feature) + " out of range");
        return f[x.feature];
    case Expr::Op::N: return n;
    case Expr::Op::Add: return arg(0) + arg(1);
    case Expr::Op::Sub: return arg(0) - arg(1);
    case Expr::Op::Mul: return arg(0) * arg(1);
    case Expr::Op::FloorDiv:
    case Expr::Op::Mod: {
        const Value a = arg(0);
        const Value b = arg(1);
        if (b == 0)
            throw Error(ErrorCode::CatalogDefinition, "division by zero");
        return x.op == Expr::Op::FloorDiv ? floor_div(a, b) : euclid_mod(a, b);
    }
    case Expr::Op::Min: return std::min(arg(0), arg(1));
    case Expr::Op::Max: return std::max(arg(0), arg(1));
    case Expr::Op::Square: {
        const Value a = arg(0);
        return a * a;
    }
    case Expr::Op::Iverson: return eval(x.conds[0], f, n) ? 1 : 0;
    case Expr::Op::Cases: {
        const Case* hit = nullptr;
        for (const auto& c : x.cases)
            if (eval(c.when, f, n)) {
                if (hit)
                    throw Error(ErrorCode::CatalogDefinition, "two cases match");
                hit = &c;
            }
        if (!hit)
            throw Error(ErrorCode::CatalogDefinition, "no case matches");
        return eval(hit->then, f, n);
    }
    case Expr::Op::Named: return arg(0);
    }
    throw Error(ErrorCode::InternalInvariant, "unknown expression node");
}

bool eval(const Cond& c, std::span<const Value> f, Value n)
{
    const auto& x = c.node();
    if (x.op == Cond::Op::And)
        return std::all_of(x.parts.begin(), x.parts.end(), [&](const Cond& p) { return eval(p, f, n); });
    const Value a = eval(x.lhs, f, n);
    const Value b = eval(x.rhs, f, n);
    switch (x.op) {
    case Cond::Op::Eq: return a == b;
    case Cond::Op::Ne: return a != b;
    case Cond::Op::Lt: return a < b;
    case Cond::Op::Le: return a <= b;
    case Cond::Op::Gt: return a > b;
    case Cond::Op::Ge: return a >= b;
    case Cond::Op::And: break;
    }
    return false;
}

namespace {

std::string_view op_symbol(Expr::Op op)
{
    switch (op) {
    case Expr::Op::Add: return "+";
    case Expr::Op::Sub: return "-";
    case Expr::Op::Mul: return "*";
    case Expr::Op::FloorDiv: return "floordiv";
    case Expr::Op::Mod: return "mod";
    case Expr::Op::Min: return "min";
    case Expr::Op::Max: return "max";
    case Expr::Op::Square: return "sq";
    default: return "?";
    }
}

std::string_view op_symbol(Cond::Op op)
{
    switch (op) {
    case Cond::Op::Eq: return "=";
    case Cond::Op::Ne: return "!=";
    case Cond::Op::Lt: return "<";
    case Cond::Op::Le: return "<=";
    case Cond::Op::Gt: return ">";
    case Cond::Op::Ge: return ">=";
    case Cond::Op::And: return "and";
    }
    return "?";
}

void render(std::ostream& os, const Cond& c, ObjectKind k);

void render(std::ostream& os, const Expr& e, ObjectKind k)
{
    const auto& x = e.node();
    switch (x.op) {
    case Expr::Op::Const: os << x.value; return;
    case Expr::Op::Feature: os << feature_names(k)[x.feature]; return;
    case Expr::Op::N: os << 'n'; return;
    case Expr::Op::Iverson:
        os << "(iverson ";
        render(os, x.conds[0], k);
        os << ')';
        return;
    case Expr::Op::Cases:
        os << "(cases";
        for (const auto& c : x.cases) {
            os << " (when ";
            render(os, c.when, k);
            os << ' ';
            render(os, c.then, k);
            os << ')';
        }
        os << ')';
        return;
    case Expr::Op::Named:
        os << "(let " << x.name << ' ';
        render(os, x.args[0], k);
        os << ')';
        return;
    default:
        os << '(' << op_symbol(x.op);
        for (const auto& a : x.args) {
            os << ' ';
            render(os, a, k);
        }
        os << ')';
    }
}

void render(std::ostream& os, const Cond& c, ObjectKind k)
{
    const auto& x = c.node();
    os << '(' << op_symbol(x.op);
    if (x.op == Cond::Op::And) {
        for (const auto& p : x.parts) {
            os << ' ';
            render(os, p, k);
        }
    } else {
        os << ' ';
        render(os, x.lhs, k);
        os << ' ';
        render(os, x.rhs, k);
    }
    os << ')';
}

void collect(const Cond& c, std::set<std::size_t>& out);

void collect(const Expr& e, std::set<std::size_t>& out)
{
    const auto& x = e.node();
    if (x.op == Expr::Op::Feature)
        out.insert(x.feature);
    for (const auto& a : x.args)
        collect(a, out);
    for (const auto& c : x.conds)
        collect(c, out);
    for (const auto& c : x.cases) {
        collect(c.when, out);
        collect(c.then, out);
    }
}

void collect(const Cond& c, std::set<std::size_t>& out)
{
    const auto& x = c.node();
    if (x.op == Cond::Op::And) {
        for (const auto& p : x.parts)
            collect(p, out);
        return;
    }
    collect(x.lhs, out);
    collect(x.rhs, out);
}

} // namespace

std::string to_prefix(const Expr& e, ObjectKind k)
{
    std::ostringstream os;
    render(os, e, k);
    return os.str();
}

std::string to_prefix(const Cond& c, ObjectKind k)
{
    std::ostringstream os;
    render(os, c, k);
    return os.str();
}

void collect_features(const Expr& e, std::set<std::size_t>& out) { collect(e, out); }

std::string_view to_string(Direction d) noexcept { return d == Direction::Upper ? "upper" : "lower"; }

std::vector<std::size_t> BoundCandidate::inputs() const
{
    std::set<std::size_t> s;
    collect(rhs, s);
    return {s.begin(), s.end()};
}

namespace {

using namespace ex;

namespace pf {
const Expr P = feat(0), Mmin = feat(1), Mmax = feat(2), rangeM = feat(3);
}
namespace bf {
const Expr N1 = feat(0), G = feat(1), Gmin = feat(2), Gmax = feat(3), rangeG = feat(4), GS = feat(5), Dmin = feat(6),
           Dmax = feat(7), rangeD = feat(8), DS = feat(9);
}

BoundCandidate bound(std::string id, ObjectKind k, std::string_view target, Direction d, Expr rhs,
                     std::string label)
{
    return {std::move(id), k, *feature_index(k, target), d, std::move(rhs), std::move(label)};
}

std::vector<BoundCandidate> build_catalog()
{
    const auto P_ = ObjectKind::Partition;
    const auto B_ = ObjectKind::BinSeq;
    const auto U = Direction::Upper;
    const auto L = Direction::Lower;
    const Expr z = lit(0);
    const Expr one = lit(1);
    const Expr two = lit(2);
    std::vector<BoundCandidate> out;

    {
        using namespace pf;
        const Expr R = named("R", n() - P * Mmin);
        const Expr MID = named("MID", cases({{gt(rangeM, z), Mmin + mod(R, rangeM)}, {le(rangeM, z), Mmin}}));
        const Expr RR = named("RR", cases({{gt(rangeM, z), floordiv(R, rangeM)}, {le(rangeM, z), z}}));
        const Expr SM = named("SM", sq(Mmax) - sq(Mmin));
        const Expr SMIN = named("SMIN", sq(Mmin) * (P - one));
        out.push_back(bound("P-S-UB", P_, "S", U, sq(MID) + SM * RR + SMIN,
                            "S <= MID^2 + SM*RR + SMIN where R = n - P*Mmin, "
                            "MID = Mmin + (R mod rangeM) if rangeM > 0 else Mmin, "
                            "RR = floor(R/rangeM) if rangeM > 0 else 0, SM = Mmax^2 - Mmin^2, SMIN = Mmin^2*(P-1)"));
        out.push_back(bound("P-RANGE-UB1", P_, "rangeM", U, n() - P * Mmin, "rangeM <= n - P*Mmin"));
        out.push_back(bound("P-RANGE-UB2", P_, "rangeM", U, min(P * Mmax - n(), Mmax - one),
                            "rangeM <= min(P*Mmax - n, Mmax - 1)"));
    }
    {
        using namespace bf;
        const Expr minD1 = min(rangeD, one);
        const Expr minG1 = min(G, one);
        out.push_back(bound("B-N1-UB", B_, "N1", U, min(G * Gmax, n() - G + one), "N1 <= min(G*Gmax, n - G + 1)"));
        out.push_back(
            bound("B-GMAX-LB", B_, "Gmax", L, floordiv(n(), n() - N1 + one), "Gmax >= floor(n / (n - N1 + 1))"));
        out.push_back(bound("B-GMAX-UB1", B_, "Gmax", U,
                            cases({{eq(rangeG, n() * rangeD), n() + rangeG},
                                   {ne(rangeG, n() * rangeD),
                                    floordiv(n() - rangeG - rangeD - minD1 - one, minD1 + two) + rangeG}}),
                            "Gmax <= n + rangeG if rangeG = n*rangeD, otherwise "
                            "floor((n - rangeG - rangeD - min(rangeD,1) - 1) / (min(rangeD,1) + 2)) + rangeG"));
        out.push_back(bound("B-DMIN-UB", B_, "Dmin", U,
                            cases({{le(G, one), z}, {gt(G, one), floordiv(n() - Gmax + one - G, G - one)}}),
                            "Dmin <= 0 if G <= 1, otherwise floor((n - Gmax + 1 - G) / (G - 1))"));
        out.push_back(bound("B-DMAX-UB", B_, "Dmax", U, iverson(ge(G, two)) * (n() - G * Gmin - G + two),
                            "Dmax <= [G >= 2]*(n - G*Gmin - G + 2)"));
        out.push_back(bound("B-GS-LB1", B_, "GS", L, sq(Gmin) * G, "GS >= Gmin^2*G"));
        out.push_back(bound("B-GS-LB2", B_, "GS", L, rangeG * (rangeG + one) * minG1 + rangeG + G,
                            "GS >= rangeG*(rangeG + 1)*min(G,1) + rangeG + G"));
        out.push_back(bound("B-GS-LB3", B_, "GS", L,
                            max(sq(Gmax) + one - iverson(eq(Dmin, z)) - iverson(eq(Gmax, z)), z),
                            "GS >= max(Gmax^2 + 1 - [Dmin = 0] - [Gmax = 0], 0)"));
        out.push_back(bound("B-GS-UB1", B_, "GS", U,
                            cases({{le(G, one), max(sq(N1) + G - one, z)},
                                   {gt(G, one), max(sq(N1 - G + one) + G - one, z)}}),
                            "GS <= max(N1^2 + G - 1, 0) if G <= 1, otherwise max((N1 - G + 1)^2 + G - 1, 0)"));
        out.push_back(bound("B-GS-UB2", B_, "GS", U,
                            cases({{all({eq(rangeD, z), eq(min(N1, one), one)}), max(sq(N1), z)},
                                   {all({eq(rangeD, z), eq(min(N1, one), z)}), z},
                                   {ge(rangeD, one), max(sq(N1 - two) + two, z)}}),
                            "GS <= max(N1^2, 0) if rangeD = 0 and min(N1,1) = 1; 0 if rangeD = 0 and min(N1,1) = 0; "
                            "max((N1 - 2)^2 + 2, 0) if rangeD >= 1"));
        out.push_back(bound("B-DS-LB1", B_, "DS", L, sq(Dmin) * (G - one), "DS >= Dmin^2*(G - 1)"));
        out.push_back(bound("B-DS-LB2", B_, "DS", L,
                            cases({{le(G, one), z}, {gt(G, one), max(sq(rangeD + one) + G - two, z)}}),
                            "DS >= 0 if G <= 1, otherwise max((rangeD + 1)^2 + G - 2, 0)"));
        out.push_back(bound("B-DS-LB3", B_, "DS", L, sq(Dmax), "DS >= Dmax^2"));
        out.push_back(bound("B-DS-UB1", B_, "DS", U, cases({{le(N1, one), z}, {gt(N1, one), sq(n() - N1)}}),
                            "DS <= 0 if N1 <= 1, otherwise (n - N1)^2"));
        out.push_back(bound("B-DS-UB2", B_, "DS", U,
                            cases({{ge(G, two), max(sq(n() - N1 - (G - two)) + G - two, z)},
                                   {lt(G, two), max(G - two, z)}}),
                            "DS <= max((n - N1 - (G - 2))^2 + G - 2, 0) if G >= 2, otherwise max(G - 2, 0)"));
        const Expr spread = n() - Dmax - (G - two) * Dmin - G;
        out.push_back(bound("B-GMAX-UB2", B_, "Gmax", U,
                            cases({{all({eq(G, one), eq(Dmax, z)}), n()},
                                   {all({ne(G, one), eq(Dmax, z)}), minG1},
                                   {all({ne(G, one), ge(Dmax, one)}), spread + minG1}}),
                            "Gmax <= n if G = 1 and Dmax = 0; min(G,1) if G != 1 and Dmax = 0; "
                            "n - Dmax - (G - 2)*Dmin - G + min(G,1) if G != 1 and Dmax >= 1"));
        out.push_back(bound("B-GS-UB3", B_, "GS", U,
                            cases({{all({eq(G, one), eq(Dmax, z)}), max(sq(n()), z)},
                                   {all({ne(G, one), eq(Dmax, z)}), max(sq(minG1) + G - one, z)},
                                   {all({ne(G, one), ge(Dmax, one)}), max(sq(spread + one) + G - one, z)}}),
                            "GS <= max(n^2, 0) if G = 1 and Dmax = 0; max(min(G,1)^2 + G - 1, 0) if G != 1 and "
                            "Dmax = 0; max((n - Dmax - (G - 2)*Dmin - G + 1)^2 + G - 1, 0) if G != 1 and Dmax >= 1"));
    }
    return out;
}

// Initial maximum of each feature as an expression in n.
Expr initial_max(ObjectKind k, std::size_t f)
{
    const Expr gap = max(n() - lit(2), lit(0));
    if (k == ObjectKind::Partition) {
        switch (f) {
        case 3: return n() - lit(1);
        case 4: return sq(n());
        default: return n();
        }
    }
    switch (f) {
    case 1: return floordiv(n() + lit(1), lit(2));
    case 4: return max(n() - lit(1), lit(0));
    case 5: return sq(n());
    case 6:
    case 7:
    case 8: return gap;
    case 9: return sq(gap);
    default: return n();
    }
}

class BoundProp final : public Propagator {
public:
    BoundProp(const BoundCandidate& b, std::vector<VarRef> featvars, Value n)
        : b_(b)
        , featvars_(std::move(featvars))
        , inputs_(b.inputs())
        , n_(n)
        , buf_(featvars_.size(), 0)
    {
    }
    ConstraintKind kind() const override { return ConstraintKind::Bound; }
    std::vector<VarRef> scope() const override
    {
        std::vector<VarRef> s;
        for (auto i : inputs_)
            s.push_back(featvars_[i]);
        s.push_back(featvars_[b_.target]);
        return s;
    }
    bool idempotent() const override { return true; }

    bool propagate(Model& m) override
    {
        for (auto i : inputs_) {
            if (!m.fixed(featvars_[i]))
                return true;
            buf_[i] = m.value(featvars_[i]);
        }
        Value rhs = 0;
        try {
            rhs = eval(b_.rhs, buf_, n_);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::CatalogDefinition)
                throw;
            return false;
        }
        const VarRef t = featvars_[b_.target];
        return b_.direction == Direction::Upper ? m.set_max(t, rhs) : m.set_min(t, rhs);
    }

private:
    BoundCandidate b_;
    std::vector<VarRef> featvars_;
    std::vector<std::size_t> inputs_;
    Value n_;
    std::vector<Value> buf_;
};

} // namespace

const std::vector<BoundCandidate>& catalog()
{
    static const std::vector<BoundCandidate> all = build_catalog();
    return all;
}

const BoundCandidate& find_bound(std::string_view id)
{
    for (const auto& b : catalog())
        if (b.id == id)
            return b;
    throw Error(ErrorCode::InvalidArgument, "unknown bound id '" + std::string(id) + "'");
}

std::vector<BoundCandidate> catalog_for(ObjectKind k)
{
    std::vector<BoundCandidate> out;
    for (const auto& b : catalog())
        if (b.object == k)
            out.push_back(b);
    return out;
}

BoundCandidate make_decoy(ObjectKind k, std::string_view feature)
{
    const auto f = feature_index(k, feature);
    if (!f)
        throw Error(ErrorCode::InvalidArgument,
                    "decoy: " + std::string(to_string(k)) + " has no feature '" + std::string(feature) + "'");
    BoundCandidate b;
    b.id = "decoy:" + std::string(feature);
    b.object = k;
    b.target = *f;
    b.direction = Direction::Upper;
    b.rhs = initial_max(k, *f);
    b.label = std::string(feature) + " <= " + to_prefix(b.rhs, k);
    return b;
}

Value eval_rhs(const BoundCandidate& b, std::span<const Value> features, Value n)
{
    if (features.size() != feature_count(b.object))
        throw Error(ErrorCode::InvalidArgument, b.id + ": wrong feature count");
    return eval(b.rhs, features, n);
}

BoundVerdict verify_on(const BoundCandidate& b, std::span<const Value> features, Value n)
{
    BoundVerdict v;
    v.rhs = eval_rhs(b, features, n);
    v.lhs = features[b.target];
    v.slack = b.direction == Direction::Upper ? v.rhs - v.lhs : v.lhs - v.rhs;
    v.holds = v.slack >= 0;
    return v;
}

BoundVerdict verify_on(const BoundCandidate& b, const PartitionFeatures& f)
{
    const auto a = f.values();
    return verify_on(b, a, f.n);
}

BoundVerdict verify_on(const BoundCandidate& b, const BinSeqFeatures& f)
{
    const auto a = f.values();
    return verify_on(b, a, f.n);
}

PostResult post_bound(Model& model, const BoundCandidate& b, std::span<const VarRef> featvars, Value n)
{
    if (featvars.size() != feature_count(b.object))
        throw Error(ErrorCode::InvalidArgument, b.id + ": featvars do not match " + std::string(to_string(b.object)));
    return model.post(std::make_unique<BoundProp>(b, std::vector<VarRef>(featvars.begin(), featvars.end()), n));
}

std::string catalog_json(std::span<const BoundCandidate> bounds, int indent)
{
    auto doc = nlohmann::json::array();
    for (const auto& b : bounds)
        doc.push_back({{"id", b.id},
                       {"object", to_string(b.object)},
                       {"target", b.target_name()},
                       {"direction", to_string(b.direction)},
                       {"rhs", to_prefix(b.rhs, b.object)}});
    return doc.dump(indent);
}

} // namespace boundforge
