// One line per acceptance criterion; exits non-zero if any fails.
#include "boundforge/error.hpp"
#include "boundforge/oracle.hpp"
#include "boundforge/selector.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace boundforge;

namespace {

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail)
{
    std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

//------------------------------------------------------------------ 1

void soundness()
{
    const auto t0 = Clock::now();
    std::vector<Value> pn, bn;
    for (Value n = 1; n <= 10; ++n)
        pn.push_back(n);
    for (Value n = 0; n <= 14; ++n)
        bn.push_back(n);
    // p(1) + ... + p(10) = 138; 2^0 + ... + 2^14 = 32767
    std::uint64_t viol = 0, bounds = 0, miscounted = 0, total = 0;
    std::string bad;
    for (const auto& b : catalog()) {
        const bool part = b.object == ObjectKind::Partition;
        const auto r = oracle::audit(b, part ? pn : bn);
        if (r.instances != (part ? 138u : 32767u))
            ++miscounted;
        total += r.instances;
        viol += r.violations.size();
        if (!r.violations.empty())
            bad += " " + b.id;
        ++bounds;
    }
    const double s = secs_since(t0);
    std::ostringstream os;
    os << bounds << " bounds over 138 partitions (n<=10) or 32767 binary sequences (n<=14), " << total
       << " checks, " << viol << " violations" << bad << ", " << s << " s";
    report(1, "bound soundness", bounds == 20 && miscounted == 0 && viol == 0 && s < 60, os.str());
}

//------------------------------------------------------------------ 2

void tightness()
{
    std::size_t keys = 0, bad = 0;
    for (const char* id : {"P-RANGE-UB1", "P-RANGE-UB2"})
        for (Value n = 1; n <= 10; ++n)
            for (const auto& r : oracle::range_tightness(find_bound(id), n)) {
                ++keys;
                if (!r.construction_ok || r.best != r.bound)
                    ++bad;
            }
    std::ostringstream os;
    os << keys << " (n, P, key) combinations, " << bad << " without a slack-0 construction";
    report(2, "range tightness", bad == 0 && keys > 0, os.str());
}

//------------------------------------------------------------------ 3

void theorem_one()
{
    std::size_t pairs = 0, bad = 0;
    for (Value n = 1; n <= 12; ++n)
        for (Value P = 1; P <= n; ++P) {
            ++pairs;
            if (oracle::max_sum_squares(n, P) != oracle::brute_max_sum_squares(n, P))
                ++bad;
        }
    std::ostringstream os;
    os << pairs << " (n, P) pairs with n<=12, " << bad << " mismatches against brute force";
    report(3, "max sum of squares", bad == 0 && pairs == 78, os.str());
}

//------------------------------------------------------------------ 4

void count_bounds()
{
    std::size_t combos = 0, broken = 0, loose = 0;
    for (Value n = 1; n <= 10; ++n)
        for (const auto& c : oracle::count_bound_checks(n)) {
            ++combos;
            if (c.omax_seen > c.omax_ub || c.omin_seen > c.omin_ub)
                ++broken;
            else if (c.omax_seen != c.omax_ub || c.omin_seen != c.omin_ub)
                ++loose;
        }
    std::ostringstream os;
    os << combos << " (n, P, Mmin, Mmax) combinations, " << broken << " violated, " << loose << " not attained";
    report(4, "part count bounds", combos > 0 && broken == 0 && loose == 0, os.str());
}

//------------------------------------------------------------------ 5-7

struct Scenario {
    ObjectKind kind;
    Value n;
    std::string tag;
    std::vector<BoundCandidate> bounds;
};

std::vector<Scenario> scenarios()
{
    std::vector<Scenario> out;
    const auto add_sizes = [&](ObjectKind k, Value lo, Value hi) {
        const auto base = catalog_for(k);
        const auto names = feature_names(k);
        for (Value n = lo; n <= hi; ++n) {
            out.push_back({k, n, "catalog", base});
            for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                auto v = base;
                std::mt19937_64 rng(seed);
                std::shuffle(v.begin(), v.end(), rng);
                out.push_back({k, n, "shuffle" + std::to_string(seed), v});
            }
            for (std::uint64_t i = 0; i < 5; ++i) {
                auto v = base;
                std::mt19937_64 rng(100 + i);
                std::shuffle(v.begin(), v.end(), rng);
                v.resize(1 + rng() % v.size());
                out.push_back({k, n, "sublist" + std::to_string(i), v});
            }
            for (std::uint64_t i = 0; i < 5; ++i) {
                auto v = base;
                std::mt19937_64 rng(200 + i);
                const auto dups = 1 + rng() % 4;
                for (std::uint64_t d = 0; d < dups; ++d)
                    v.push_back(base[rng() % base.size()]);
                const auto decoys = 1 + rng() % 4;
                for (std::uint64_t d = 0; d < decoys; ++d)
                    v.push_back(make_decoy(k, names[rng() % names.size()]));
                std::shuffle(v.begin(), v.end(), rng);
                if (v.size() > 25)
                    v.resize(25);
                out.push_back({k, n, "inject" + std::to_string(i), v});
            }
        }
    };
    add_sizes(ObjectKind::Partition, 3, 6);
    add_sizes(ObjectKind::BinSeq, 3, 8);
    return out;
}

std::vector<SolutionRecord> by_isol(std::vector<SolutionRecord> v)
{
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.isol < b.isol; });
    return v;
}

void selection_criteria()
{
    const auto t0 = Clock::now();
    const auto all = scenarios();
    std::size_t same = 0, preserved = 0, multi = 0, cheaper = 0;
    std::uint64_t inc_posts = 0, base_posts = 0;
    std::string first_mismatch, first_lost, first_dear;
    for (const auto& s : all) {
        const auto cands = make_candidates(s.bounds, s.n);
        const auto ctr = object_ctr(s.kind, s.n);
        const auto inc = selection(ctr, cands);
        const auto base = baseline_selection(ctr, cands);
        const auto name = std::string(to_string(s.kind)) + " n=" + std::to_string(s.n) + " " + s.tag;
        if (inc.selected == base.selected)
            ++same;
        else if (first_mismatch.empty())
            first_mismatch = name;

        std::vector<Candidate> kept;
        for (auto slot : inc.selected_slots)
            kept.push_back(cands[slot]);
        if (by_isol(enumerate_with(ctr, kept)) == by_isol(inc.all_sols))
            ++preserved;
        else if (first_lost.empty())
            first_lost = name;

        if (inc.selected.size() >= 2) {
            ++multi;
            inc_posts += inc.posts;
            base_posts += base.posts;
            if (inc.posts < base.posts)
                ++cheaper;
            else if (first_dear.empty())
                first_dear = name;
        }
    }
    const double s = secs_since(t0);
    {
        std::ostringstream os;
        os << same << "/" << all.size() << " scenarios with identical selected lists, " << s << " s";
        if (!first_mismatch.empty())
            os << ", first mismatch " << first_mismatch;
        report(5, "selector equivalence", all.size() >= 200 && same == all.size() && s < 600, os.str());
    }
    {
        std::ostringstream os;
        os << preserved << "/" << all.size() << " scenarios reproduce every record with only the selected bounds";
        if (!first_lost.empty())
            os << ", first loss " << first_lost;
        report(6, "filtering preservation", preserved == all.size(), os.str());
    }
    {
        const double ratio = base_posts ? static_cast<double>(inc_posts) / static_cast<double>(base_posts) : 1.0;
        std::ostringstream os;
        os << multi << " scenarios select >= 2 bounds, " << cheaper << " of them cheaper than baseline, posts "
           << inc_posts << " vs " << base_posts << " (ratio " << ratio << ")";
        if (!first_dear.empty())
            os << ", first not cheaper " << first_dear;
        report(7, "incrementality", multi > 0 && cheaper == multi && ratio <= 0.8, os.str());
    }
}

//------------------------------------------------------------------ 8

struct Fixtures {
    int total = 0;
    std::vector<std::string> failed;
    void check(const std::string& name, const std::function<bool()>& f)
    {
        ++total;
        bool ok = false;
        try {
            ok = f();
        } catch (const std::exception&) {
            ok = false;
        }
        if (!ok)
            failed.push_back(name);
    }
};

bool dom_is(const Model& m, VarRef v, std::vector<Value> vals) { return m.dom(v).values() == vals; }

void kernel_fixtures()
{
    Fixtures fx;
    fx.check("post A=B satisfied", [] {
        Model m;
        auto a = m.new_var(1, 1), b = m.new_var(1, 1);
        return m.post(CompareVars{a, Relation::Eq, b}).ok() && dom_is(m, a, {1}) && dom_is(m, b, {1});
    });
    fx.check("post A=B contradiction", [] {
        Model m;
        auto a = m.new_var(1, 1), b = m.new_var(2, 2);
        const auto before = m.snapshot();
        return !m.post(CompareVars{a, Relation::Eq, b}).ok() && m.snapshot() == before && m.num_constraints() == 0;
    });
    fx.check("post A<=2 prunes", [] {
        Model m;
        auto a = m.new_var(1, 3);
        return m.post(CompareConst{a, Relation::Le, 2}).ok() && dom_is(m, a, {1, 2});
    });
    fx.check("lex [A] > [0]", [] {
        Model m;
        auto a = m.new_var(0, 1);
        const VarRef v[] = {a};
        const Value t[] = {0};
        return m.post_lex_greater(v, t).ok() && dom_is(m, a, {1});
    });
    fx.check("lex [A] > [1] fails", [] {
        Model m;
        auto a = m.new_var(0, 1);
        const VarRef v[] = {a};
        const Value t[] = {1};
        return !m.post_lex_greater(v, t).ok() && dom_is(m, a, {0, 1});
    });
    fx.check("lex [A,B] > [0,1]", [] {
        Model m;
        auto a = m.new_var(0, 1), b = m.new_var(0, 1);
        const VarRef v[] = {a, b};
        const Value t[] = {0, 1};
        if (!m.post_lex_greater(v, t))
            return false;
        std::vector<std::vector<Value>> sols;
        for (auto rec : enumerate_all_solutions(m, v, {}))
            if (!rec.sentinel())
                sols.push_back(rec.sol);
        return sols == std::vector<std::vector<Value>>{{1, 0}, {1, 1}};
    });
    fx.check("lex length mismatch", [] {
        Model m;
        auto a = m.new_var(0, 1);
        const VarRef v[] = {a};
        const Value t[] = {0, 0};
        try {
            m.post_lex_greater(v, t);
        } catch (const Error& e) {
            return e.code() == ErrorCode::InvalidArgument;
        }
        return false;
    });
    fx.check("retract single post", [] {
        Model m;
        auto a = m.new_var(0, 3);
        const auto before = m.snapshot();
        const auto mk = m.mark();
        m.post(CompareConst{a, Relation::Le, 1});
        m.retract_to(mk);
        return m.snapshot() == before && m.num_constraints() == 0;
    });
    fx.check("retract after failed post", [] {
        Model m;
        auto a = m.new_var(0, 3);
        const auto before = m.snapshot();
        const auto mk = m.mark();
        if (m.post(CompareConst{a, Relation::Gt, 5}))
            return false;
        m.retract_to(mk);
        return m.snapshot() == before;
    });
    fx.check("retract two posts", [] {
        Model m;
        auto b = m.new_var(0, 5);
        const auto before = m.snapshot();
        const auto mk = m.mark();
        m.post(CompareConst{b, Relation::Ge, 2});
        m.post(CompareConst{b, Relation::Le, 2});
        if (!dom_is(m, b, {2}))
            return false;
        m.retract_to(mk);
        return m.snapshot() == before;
    });
    fx.check("stale mark", [] {
        Model m;
        auto a = m.new_var(0, 3);
        const auto outer = m.mark();
        m.post(CompareConst{a, Relation::Le, 2});
        const auto inner = m.mark();
        m.retract_to(outer);
        try {
            m.retract_to(inner);
        } catch (const Error& e) {
            return e.code() == ErrorCode::InvalidMark;
        }
        return false;
    });
    fx.check("label A free", [] {
        Model m;
        auto a = m.new_var(0, 1);
        const VarRef v[] = {a};
        const auto r = m.labeling(v, {});
        return r.nback == 0 && !r.finished && r.sol == std::vector<Value>{0};
    });
    fx.check("label A>=1", [] {
        Model m;
        auto a = m.new_var(0, 1);
        m.post(CompareConst{a, Relation::Ge, 1});
        const VarRef v[] = {a};
        const auto r = m.labeling(v, {});
        return r.nback == 0 && !r.finished && r.sol == std::vector<Value>{1};
    });
    fx.check("label checker A=1", [] {
        Model m;
        auto a = m.new_var(0, 1);
        m.post(Checker{{a}, [](std::span<const Value> x) { return x[0] == 1; }});
        const VarRef v[] = {a};
        const auto before = m.snapshot();
        const auto r = m.labeling(v, {});
        return r.nback == 1 && !r.finished && r.sol == std::vector<Value>{1} && m.snapshot() == before;
    });
    fx.check("split rule", [] { return split_point(250) == 150 && split_point(2) == 1 && split_point(9) == 6; });
    fx.check("records for A in {0,1}", [] {
        Model m;
        auto a = m.new_var(0, 1);
        const VarRef v[] = {a};
        auto recs = enumerate_all_solutions(m, v, {});
        sort_by_nback(recs);
        const std::vector<SolutionRecord> want{{0, 0, {0}}, {1, 0, {1}}, {2, 0, {}}};
        return recs == want;
    });
    fx.check("always-false sentinel", [] {
        Model m;
        auto a = m.new_var(0, 1);
        m.post(Checker{{a}, [](std::span<const Value>) { return false; }});
        const VarRef v[] = {a};
        const std::vector<SolutionRecord> want{{0, 2, {}}};
        return enumerate_all_solutions(m, v, {}) == want;
    });
    fx.check("dicho len 1", [] {
        // A in {0,1}, solutions need A=1 but only a leaf check says so
        Model m;
        auto a = m.new_var(0, 1), b = m.new_var(0, 1);
        m.post(Checker{{a, b}, [](std::span<const Value> x) { return x[0] == 1; }});
        const std::vector<Candidate> cands{
            {"A>=1", [](Model& mm, std::span<const VarRef> fv) { return mm.post(CompareConst{fv[0], Relation::Ge, 1}); }},
            {"A<=1", [](Model& mm, std::span<const VarRef> fv) { return mm.post(CompareConst{fv[0], Relation::Le, 1}); }}};
        const VarRef fv[] = {a, b};
        Selector sel(m, fv, {}, cands);
        const auto all = sel.compute_all_solutions();
        const auto miss = sel.dicho(all, all, 1, {0}, {});
        cands[0].post(m, fv);
        const auto hold = sel.dicho(all, all, 1, {1}, {});
        return miss.selected == std::optional<std::size_t>{0} && miss.rest.empty() && !hold.selected &&
               hold.rest == std::vector<std::size_t>{1};
    });
    std::ostringstream os;
    os << fx.total - static_cast<int>(fx.failed.size()) << "/" << fx.total << " fixtures";
    for (const auto& f : fx.failed)
        os << ", failed: " << f;
    report(8, "kernel fixtures", fx.failed.empty(), os.str());
}

} // namespace

int main()
{
    soundness();
    tightness();
    theorem_one();
    count_bounds();
    selection_criteria();
    kernel_fixtures();
    std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
