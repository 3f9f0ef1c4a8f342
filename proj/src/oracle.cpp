#include "boundforge/oracle.hpp"

#include "boundforge/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace boundforge::oracle {

std::vector<PartSizes> enum_partitions(Value n)
{
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, "enum_partitions needs n >= 1, got " + std::to_string(n));
    // Iterative successor walk in reverse lexicographic order: [n], [n-1,1], ...
    std::vector<PartSizes> out;
    PartSizes a{n};
    for (;;) {
        out.push_back(a);
        // drop trailing 1s, decrement the last part > 1, refill greedily
        Value ones = 0;
        while (!a.empty() && a.back() == 1) {
            a.pop_back();
            ++ones;
        }
        if (a.empty())
            break;
        const Value v = --a.back();
        Value rest = ones + 1;
        while (rest > 0) {
            const Value take = std::min(v, rest);
            a.push_back(take);
            rest -= take;
        }
    }
    return out;
}

BinSeqs::iterator::iterator(Value n, std::uint64_t mask)
    : n_(n)
    , mask_(mask)
    , bits_(static_cast<std::size_t>(n))
{
    fill();
}

BinSeqs::iterator& BinSeqs::iterator::operator++()
{
    ++mask_;
    fill();
    return *this;
}

void BinSeqs::iterator::fill()
{
    for (Value i = 0; i < n_; ++i)
        bits_[static_cast<std::size_t>(i)] = static_cast<Value>((mask_ >> i) & 1u);
}

BinSeqs::BinSeqs(Value n)
    : n_(n)
{
    if (n < 0 || n > 40)
        throw Error(ErrorCode::InvalidArgument, "enum_binseqs needs 0 <= n <= 40, got " + std::to_string(n));
}

BinSeqs enum_binseqs(Value n) { return BinSeqs(n); }

std::vector<Value> partition_tuple(const PartSizes& sizes)
{
    auto s = sizes;
    std::sort(s.begin(), s.end());
    Value sq = 0;
    for (auto v : s)
        sq += v * v;
    return {static_cast<Value>(s.size()), s.front(), s.back(), s.back() - s.front(), sq};
}

std::vector<Value> binseq_tuple(std::span<const Value> bits)
{
    // run-length encode, then split runs of 1s from interior runs of 0s
    std::vector<std::pair<Value, Value>> runs;
    for (auto b : bits) {
        if (!runs.empty() && runs.back().first == b)
            ++runs.back().second;
        else
            runs.emplace_back(b, 1);
    }
    std::vector<Value> ones, gaps;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].first == 1)
            ones.push_back(runs[i].second);
        else if (i > 0 && i + 1 < runs.size())
            gaps.push_back(runs[i].second);
    }
    const auto stats = [](const std::vector<Value>& v) {
        Value lo = 0, hi = 0, sum = 0, sq = 0;
        if (!v.empty()) {
            lo = *std::min_element(v.begin(), v.end());
            hi = *std::max_element(v.begin(), v.end());
        }
        for (auto x : v) {
            sum += x;
            sq += x * x;
        }
        return std::array<Value, 4>{lo, hi, sum, sq};
    };
    const auto g = stats(ones);
    const auto d = stats(gaps);
    return {g[2], static_cast<Value>(ones.size()), g[0], g[1], g[1] - g[0], g[3], d[0], d[1], d[1] - d[0], d[3]};
}

std::set<std::vector<Value>> feasible_tuples(ObjectKind k, Value n)
{
    std::set<std::vector<Value>> out;
    if (k == ObjectKind::Partition) {
        for (const auto& p : enum_partitions(n))
            out.insert(partition_tuple(p));
    } else {
        for (const auto& bits : enum_binseqs(n))
            out.insert(binseq_tuple(bits));
    }
    return out;
}

AuditReport audit(const BoundCandidate& b, std::span<const Value> ns)
{
    AuditReport rep;
    rep.bound_id = b.id;
    for (auto n : ns) {
        AuditRow row;
        row.n = n;
        std::set<std::vector<Value>> tight;
        const auto visit = [&](const std::vector<Value>& f) {
            ++row.instances;
            const auto v = verify_on(b, f, n);
            if (!v.holds) {
                ++row.violations;
                rep.violations.push_back({f, v.lhs, v.rhs});
            }
            if (v.slack == 0)
                tight.insert(f);
            row.min_slack = row.min_slack ? std::min(*row.min_slack, v.slack) : v.slack;
        };
        if (b.object == ObjectKind::Partition) {
            for (const auto& p : enum_partitions(n))
                visit(partition_tuple(p));
        } else {
            for (const auto& bits : enum_binseqs(n))
                visit(binseq_tuple(bits));
        }
        row.witnesses = tight.size();
        rep.witnesses[n] = {tight.begin(), tight.end()};
        rep.instances += row.instances;
        rep.rows.push_back(row);
    }
    return rep;
}

AuditReport audit(const BoundCandidate& b, Value n)
{
    const Value ns[] = {n};
    return audit(b, ns);
}

std::string audit_json(std::span<const AuditReport> reports)
{
    auto audits = nlohmann::json::array();
    std::uint64_t total = 0;
    for (const auto& r : reports) {
        auto rows = nlohmann::json::array();
        for (const auto& row : r.rows)
            rows.push_back({{"n", row.n},
                            {"instances", row.instances},
                            {"violations", row.violations},
                            {"witnesses", row.witnesses},
                            {"min_slack", row.min_slack ? nlohmann::json(*row.min_slack) : nlohmann::json()}});
        auto viol = nlohmann::json::array();
        for (const auto& v : r.violations)
            viol.push_back({{"features", v.features}, {"lhs", v.lhs}, {"rhs", v.rhs}});
        total += r.violations.size();
        audits.push_back({{"bound", r.bound_id}, {"instances", r.instances}, {"violations", viol}, {"rows", rows}});
    }
    return nlohmann::json{{"audits", audits}, {"violations", total}}.dump(2);
}

std::string audit_csv(std::span<const AuditReport> reports)
{
    std::ostringstream os;
    os << "bound,n,instances,violations,witnesses,min_slack\n";
    for (const auto& r : reports)
        for (const auto& row : r.rows) {
            os << r.bound_id << ',' << row.n << ',' << row.instances << ',' << row.violations << ','
               << row.witnesses << ',';
            if (row.min_slack)
                os << *row.min_slack;
            os << '\n';
        }
    return os.str();
}

Value max_sum_squares(Value n, Value P)
{
    if (P < 1 || P > n)
        throw Error(ErrorCode::InvalidArgument, "max_sum_squares needs 1 <= P <= n");
    return (n - P + 1) * (n - P + 1) + P - 1;
}

Value brute_max_sum_squares(Value n, Value P)
{
    Value best = -1;
    for (const auto& p : enum_partitions(n))
        if (static_cast<Value>(p.size()) == P)
            best = std::max(best, partition_tuple(p)[4]);
    if (best < 0)
        throw Error(ErrorCode::InvalidArgument, "no partition of " + std::to_string(n) + " into " +
                                                    std::to_string(P) + " parts");
    return best;
}

std::pair<Value, Value> omax_omin_bounds(Value n, Value P, Value Mmin, Value Mmax)
{
    const Value range = Mmax - Mmin;
    const Value R = n - P * Mmin;
    if (range <= 0 || R < 0)
        throw Error(ErrorCode::InvalidArgument, "omax_omin_bounds needs Mmax > Mmin and n >= P*Mmin");
    const Value down = R / range;
    const Value up = (R + range - 1) / range;
    return {down, P - up};
}

std::pair<Value, Value> omax_omin(const PartSizes& sizes)
{
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    return {static_cast<Value>(std::count(sizes.begin(), sizes.end(), *hi)),
            static_cast<Value>(std::count(sizes.begin(), sizes.end(), *lo))};
}

namespace {

using Key = std::array<Value, 3>; // P, Mmin, Mmax

std::map<Key, std::vector<PartSizes>> by_shape(Value n)
{
    std::map<Key, std::vector<PartSizes>> out;
    for (const auto& p : enum_partitions(n)) {
        const auto t = partition_tuple(p);
        out[{t[0], t[1], t[2]}].push_back(p);
    }
    return out;
}

Value sum_sq(const PartSizes& p)
{
    Value s = 0;
    for (auto v : p)
        s += v * v;
    return s;
}

std::vector<Value> interior(const PartSizes& p, Value lo, Value hi)
{
    std::vector<Value> out;
    for (auto v : p)
        if (v > lo && v < hi)
            out.push_back(v);
    return out;
}

} // namespace

std::vector<PartSizes> lemma_interior_pair_counterexamples(Value n)
{
    std::vector<PartSizes> bad;
    for (const auto& [key, parts] : by_shape(n)) {
        Value best = 0;
        for (const auto& p : parts)
            best = std::max(best, sum_sq(p));
        for (const auto& p : parts)
            if (interior(p, key[1], key[2]).size() >= 2 && sum_sq(p) >= best)
                bad.push_back(p);
    }
    return bad;
}

std::vector<PartSizes> lemma_interior_part_counterexamples(Value n)
{
    std::vector<PartSizes> bad;
    for (const auto& [key, parts] : by_shape(n)) {
        const auto [P, lo, hi] = key;
        const Value range = hi - lo;
        if (range == 0)
            continue;
        const Value rem = (n - P * lo) % range;
        Value best = 0;
        for (const auto& p : parts)
            best = std::max(best, sum_sq(p));
        for (const auto& p : parts) {
            if (sum_sq(p) != best)
                continue;
            const auto mid = interior(p, lo, hi);
            const bool ok = rem > 0 ? mid == std::vector<Value>{lo + rem} : mid.empty();
            if (!ok)
                bad.push_back(p);
        }
    }
    return bad;
}

std::vector<CountBoundCheck> count_bound_checks(Value n)
{
    std::vector<CountBoundCheck> out;
    for (const auto& [key, parts] : by_shape(n)) {
        const auto [P, lo, hi] = key;
        if (hi == lo)
            continue;
        CountBoundCheck c;
        c.P = P;
        c.Mmin = lo;
        c.Mmax = hi;
        std::tie(c.omax_ub, c.omin_ub) = omax_omin_bounds(n, P, lo, hi);
        for (const auto& p : parts) {
            const auto [omax, omin] = omax_omin(p);
            c.omax_seen = std::max(c.omax_seen, omax);
            c.omin_seen = std::max(c.omin_seen, omin);
        }
        out.push_back(c);
    }
    return out;
}

namespace {

// P-1 parts of Mmin and the rest in one part.
PartSizes push_one_up(Value n, Value P, Value lo)
{
    PartSizes p(static_cast<std::size_t>(P - 1), lo);
    p.push_back(n - (P - 1) * lo);
    return p;
}

// One part of Mmax, one as small as the rest allows, the others filled
// greedily up to Mmax.
PartSizes push_one_down(Value n, Value P, Value hi)
{
    if (P == 1)
        return {n};
    const Value lo = std::max<Value>(1, n - (P - 1) * hi);
    PartSizes p{hi, lo};
    Value rest = n - hi - lo;
    for (Value i = 0; i < P - 2; ++i) {
        const Value take = std::min(hi, rest - (P - 3 - i) * lo);
        p.push_back(take);
        rest -= take;
    }
    return p;
}

} // namespace

std::vector<RangeTightness> range_tightness(const BoundCandidate& b, Value n)
{
    const bool ub1 = b.id == "P-RANGE-UB1";
    if (!ub1 && b.id != "P-RANGE-UB2")
        throw Error(ErrorCode::InvalidArgument, "range_tightness only knows the two range bounds, got " + b.id);
    const std::size_t key_at = ub1 ? 1 : 2;
    std::map<std::pair<Value, Value>, Value> best;
    for (const auto& p : enum_partitions(n)) {
        const auto t = partition_tuple(p);
        auto [it, fresh] = best.try_emplace({t[0], t[key_at]}, t[3]);
        if (!fresh)
            it->second = std::max(it->second, t[3]);
    }
    std::vector<RangeTightness> out;
    for (const auto& [k, top] : best) {
        RangeTightness r;
        r.P = k.first;
        r.key = k.second;
        r.best = top;
        r.construction = ub1 ? push_one_up(n, r.P, r.key) : push_one_down(n, r.P, r.key);
        const bool valid = std::all_of(r.construction.begin(), r.construction.end(), [](Value v) { return v >= 1; });
        Value sum = 0;
        for (auto v : r.construction)
            sum += v;
        if (valid && sum == n) {
            const auto t = partition_tuple(r.construction);
            r.bound = eval_rhs(b, t, n);
            r.construction_ok = t[0] == r.P && t[key_at] == r.key && t[3] == r.bound;
        }
        out.push_back(r);
    }
    return out;
}

} // namespace boundforge::oracle
