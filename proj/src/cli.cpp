#include "boundforge/cli.hpp"

#include "boundforge/error.hpp"
#include "boundforge/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <atomic>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace boundforge::cli {

namespace {

using nlohmann::json;

// Usage problems found after CLI11 is done.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Range {
    Value lo = 0;
    Value hi = 0;
};

Range parse_range(const std::string& s)
{
    const auto dots = s.find("..");
    try {
        std::size_t used = 0;
        if (dots == std::string::npos) {
            const Value v = std::stoll(s, &used);
            if (used != s.size())
                throw UsageError("bad --n '" + s + "'");
            return {v, v};
        }
        const auto a = s.substr(0, dots), b = s.substr(dots + 2);
        Range r{std::stoll(a, &used), 0};
        if (used != a.size())
            throw UsageError("bad --n '" + s + "'");
        r.hi = std::stoll(b, &used);
        if (used != b.size() || r.hi < r.lo)
            throw UsageError("bad --n '" + s + "'");
        return r;
    } catch (const std::logic_error&) {
        throw UsageError("bad --n '" + s + "'");
    }
}

// Largest n each command accepts unless BOUNDFORGE_MAX_N says otherwise.
Value default_cap(bool verify, ObjectKind k)
{
    if (verify)
        return k == ObjectKind::Partition ? 12 : 16;
    return k == ObjectKind::Partition ? 8 : 10;
}

Value cap_for(bool verify, ObjectKind k)
{
    Value cap = default_cap(verify, k);
    if (const char* env = std::getenv("BOUNDFORGE_MAX_N")) {
        std::size_t used = 0;
        const std::string s(env);
        try {
            cap = std::stoll(s, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (s.empty() || used != s.size() || cap < 0)
            throw UsageError("BOUNDFORGE_MAX_N must be a non-negative integer, got '" + s + "'");
    }
    // enumerators and models have their own hard limits
    const Value hard = verify ? (k == ObjectKind::Partition ? 60 : 30) : kMaxModelN;
    return std::min(cap, hard);
}

void check_range(Range r, bool verify, ObjectKind k)
{
    const Value lo = k == ObjectKind::Partition ? 1 : 0;
    const Value cap = cap_for(verify, k);
    if (r.lo < lo || r.hi > cap)
        throw UsageError("n for " + std::string(to_string(k)) + " must lie in " + std::to_string(lo) + ".." +
                         std::to_string(cap));
}

ObjectKind object_of(const std::string& s)
{
    const auto k = parse_object(s);
    if (!k)
        throw UsageError("unknown object '" + s + "' (partition or binseq)");
    return *k;
}

const BoundCandidate& bound_of(const std::string& id)
{
    try {
        return find_bound(id);
    } catch (const Error&) {
        throw UsageError("unknown bound id '" + id + "'");
    }
}

std::vector<BoundCandidate> read_candidates(const std::string& path, ObjectKind k)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot read candidate file '" + path + "'");
    std::vector<BoundCandidate> out;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        const auto e = line.find_last_not_of(" \t\r");
        const auto id = line.substr(b, e - b + 1);
        const auto where = path + ":" + std::to_string(lineno) + ": ";
        if (id.rfind("decoy:", 0) == 0) {
            try {
                out.push_back(make_decoy(k, id.substr(6)));
            } catch (const Error&) {
                throw UsageError(where + "unknown feature in '" + id + "'");
            }
            continue;
        }
        const auto& bound = bound_of(id);
        if (bound.object != k)
            throw UsageError(where + id + " is not a " + std::string(to_string(k)) + " bound");
        out.push_back(bound);
    }
    return out;
}

std::string join(const std::vector<std::string>& xs, const char* sep)
{
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i)
        s += (i ? sep : "") + xs[i];
    return s;
}

std::string values_str(const std::vector<Value>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

struct Common {
    std::string format = "json";
    std::string out;
};

void emit(const Common& c, std::ostream& out, const std::string& text)
{
    if (c.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f)
        throw UsageError("cannot write '" + c.out + "'");
    f << text;
}

//------------------------------------------------------------------ verify

struct VerifyCfg {
    Common common;
    std::string object;
    std::vector<std::string> bounds;
    std::string n;
};

oracle::AuditReport merge(std::vector<oracle::AuditReport> parts)
{
    oracle::AuditReport r;
    for (auto& p : parts) {
        r.bound_id = p.bound_id;
        r.instances += p.instances;
        r.violations.insert(r.violations.end(), p.violations.begin(), p.violations.end());
        r.witnesses.merge(p.witnesses);
        r.rows.insert(r.rows.end(), p.rows.begin(), p.rows.end());
    }
    return r;
}

int cmd_verify(const VerifyCfg& cfg, std::ostream& out)
{
    std::vector<BoundCandidate> bounds;
    std::optional<ObjectKind> only;
    if (!cfg.object.empty())
        only = object_of(cfg.object);
    if (cfg.bounds.empty()) {
        for (const auto& b : catalog())
            if (!only || b.object == *only)
                bounds.push_back(b);
    } else {
        for (const auto& id : cfg.bounds) {
            const auto& b = bound_of(id);
            if (only && b.object != *only)
                throw UsageError(id + " is not a " + cfg.object + " bound");
            bounds.push_back(b);
        }
    }
    std::optional<Range> given;
    if (!cfg.n.empty())
        given = parse_range(cfg.n);

    struct Job {
        std::size_t bound;
        Value n;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        const auto& b = bounds[i];
        const Range r = given ? *given : Range{b.object == ObjectKind::Partition ? 1 : 0,
                                                b.object == ObjectKind::Partition ? 10 : 14};
        check_range(r, true, b.object);
        for (Value n = r.lo; n <= r.hi; ++n)
            jobs.push_back({i, n});
    }
    std::vector<oracle::AuditReport> done(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t j; (j = next++) < jobs.size();)
            done[j] = oracle::audit(bounds[jobs[j].bound], jobs[j].n);
    };
    const auto nthreads = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nthreads; ++t)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();

    // jobs are grouped by bound, in order
    std::vector<oracle::AuditReport> reports;
    for (std::size_t j = 0; j < jobs.size();) {
        std::vector<oracle::AuditReport> parts;
        const auto b = jobs[j].bound;
        for (; j < jobs.size() && jobs[j].bound == b; ++j)
            parts.push_back(std::move(done[j]));
        reports.push_back(merge(std::move(parts)));
    }

    std::uint64_t violations = 0;
    for (const auto& r : reports)
        violations += r.violations.size();
    std::string text;
    if (cfg.common.format == "json") {
        text = oracle::audit_json(reports) + "\n";
    } else if (cfg.common.format == "csv") {
        text = oracle::audit_csv(reports);
    } else {
        std::ostringstream os;
        for (const auto& r : reports) {
            std::optional<Value> slack;
            for (const auto& row : r.rows)
                if (row.min_slack)
                    slack = slack ? std::min(*slack, *row.min_slack) : *row.min_slack;
            os << std::left << std::setw(14) << r.bound_id << " n=" << r.rows.front().n << ".." << r.rows.back().n
               << " instances=" << r.instances << " violations=" << r.violations.size();
            if (slack)
                os << " min_slack=" << *slack;
            os << '\n';
        }
        os << (violations ? "FAIL " : "OK ") << violations << " violations\n";
        text = os.str();
    }
    emit(cfg.common, out, text);
    return violations ? Failed : Ok;
}

//------------------------------------------------------------------ select / compare / solutions

struct ScenarioCfg {
    Common common;
    std::string object;
    std::string n;
    std::string candidates;
    std::optional<std::uint64_t> seed;
    bool no_timing = false;
};

struct Scenario {
    ObjectKind kind;
    Value n;
    std::vector<BoundCandidate> bounds;
};

Scenario scenario(const ScenarioCfg& cfg)
{
    Scenario s{object_of(cfg.object), 0, {}};
    const auto r = parse_range(cfg.n);
    if (r.lo != r.hi)
        throw UsageError("this command takes a single n");
    check_range(r, false, s.kind);
    s.n = r.lo;
    s.bounds = cfg.candidates.empty() ? catalog_for(s.kind) : read_candidates(cfg.candidates, s.kind);
    if (cfg.seed) {
        std::mt19937_64 rng(*cfg.seed);
        std::shuffle(s.bounds.begin(), s.bounds.end(), rng);
    }
    return s;
}

json report_obj(const SelectionReport& r, bool no_timing)
{
    return {{"selected", r.selected},
            {"posts", r.posts},
            {"labelings", r.labelings},
            {"wall_ms", no_timing ? 0 : r.wall_ms}};
}

int cmd_select(const ScenarioCfg& cfg, std::ostream& out, const Hooks& hooks)
{
    const auto s = scenario(cfg);
    const auto cands = make_candidates(s.bounds, s.n);
    auto r = hooks.incremental(object_ctr(s.kind, s.n), cands);
    if (cfg.no_timing)
        r.wall_ms = 0;
    std::string text;
    if (cfg.common.format == "json") {
        text = report_json(r) + "\n";
    } else if (cfg.common.format == "csv") {
        text = "selected,posts,labelings,wall_ms\n" + join(r.selected, ";") + "," + std::to_string(r.posts) + "," +
               std::to_string(r.labelings) + "," + std::to_string(r.wall_ms) + "\n";
    } else {
        std::ostringstream os;
        os << to_string(s.kind) << " n=" << s.n << ": " << r.selected.size() << " of " << cands.size()
           << " candidates selected\n";
        for (const auto& id : r.selected)
            os << "  " << id << '\n';
        os << "posts=" << r.posts << " labelings=" << r.labelings << " wall_ms=" << r.wall_ms << '\n';
        text = os.str();
    }
    emit(cfg.common, out, text);
    return Ok;
}

int cmd_compare(const ScenarioCfg& cfg, std::ostream& out, const Hooks& hooks)
{
    const auto s = scenario(cfg);
    const auto cands = make_candidates(s.bounds, s.n);
    const auto ctr = object_ctr(s.kind, s.n);
    const auto inc = hooks.incremental(ctr, cands);
    const auto base = hooks.baseline(ctr, cands);
    const bool same = inc.selected == base.selected;
    const double ratio = base.posts ? static_cast<double>(inc.posts) / static_cast<double>(base.posts) : 0.0;
    std::string text;
    if (cfg.common.format == "json") {
        json j{{"object", to_string(s.kind)},
               {"n", s.n},
               {"identical", same},
               {"incremental", report_obj(inc, cfg.no_timing)},
               {"baseline", report_obj(base, cfg.no_timing)},
               {"posts_ratio", ratio}};
        text = j.dump(2) + "\n";
    } else if (cfg.common.format == "csv") {
        std::ostringstream os;
        os << "run,selected,posts,labelings,wall_ms\n";
        for (const auto* r : {&inc, &base})
            os << (r == &inc ? "incremental" : "baseline") << ',' << join(r->selected, ";") << ',' << r->posts
               << ',' << r->labelings << ',' << (cfg.no_timing ? 0 : r->wall_ms) << '\n';
        text = os.str();
    } else {
        std::ostringstream os;
        for (const auto* r : {&inc, &base})
            os << std::left << std::setw(12) << (r == &inc ? "incremental" : "baseline") << " posts=" << r->posts
               << " labelings=" << r->labelings << " wall_ms=" << (cfg.no_timing ? 0 : r->wall_ms) << "  ["
               << join(r->selected, " ") << "]\n";
        os << (same ? "identical" : "MISMATCH") << " posts_ratio=" << std::fixed << std::setprecision(3) << ratio
           << '\n';
        text = os.str();
    }
    emit(cfg.common, out, text);
    return same ? Ok : Failed;
}

int cmd_solutions(const ScenarioCfg& cfg, std::ostream& out)
{
    const auto s = scenario(cfg);
    const auto cands = make_candidates(s.bounds, s.n);
    const auto ctr = object_ctr(s.kind, s.n);
    struct Run {
        const char* name;
        std::vector<SolutionRecord> lex;
        std::vector<SolutionRecord> sorted;
    };
    std::vector<Run> runs{{"with_bounds", enumerate_with(ctr, cands), {}}, {"without_bounds", enumerate_with(ctr, {}), {}}};
    for (auto& r : runs) {
        r.sorted = r.lex;
        sort_by_nback(r.sorted);
    }
    // pointwise on the isols both runs reach
    bool dominated = true;
    const auto common = std::min(runs[0].lex.size(), runs[1].lex.size());
    for (std::size_t i = 0; i < common; ++i)
        dominated = dominated && runs[0].lex[i].nback <= runs[1].lex[i].nback;

    std::string text;
    if (cfg.common.format == "json") {
        const auto recs = [](const std::vector<SolutionRecord>& v) {
            auto a = json::array();
            for (const auto& r : v)
                a.push_back({{"isol", r.isol}, {"nback", r.nback}, {"sol", r.sol}});
            return a;
        };
        json j{{"object", to_string(s.kind)},
               {"n", s.n},
               {"features", feature_names(s.kind)},
               {"bounds", json::array()},
               {"nback_dominated", dominated}};
        for (const auto& c : cands)
            j["bounds"].push_back(c.id);
        for (const auto& r : runs)
            j[r.name] = {{"lex", recs(r.lex)}, {"sorted", recs(r.sorted)}};
        text = j.dump(2) + "\n";
    } else if (cfg.common.format == "csv") {
        std::ostringstream os;
        os << "posted,order,isol,nback,sol\n";
        for (const auto& r : runs)
            for (const auto* order : {"lex", "sorted"})
                for (const auto& rec : std::string(order) == "lex" ? r.lex : r.sorted)
                    os << r.name << ',' << order << ',' << rec.isol << ',' << rec.nback << ',' << values_str(rec.sol)
                       << '\n';
        text = os.str();
    } else {
        std::ostringstream os;
        std::vector<std::string> names(feature_names(s.kind).begin(), feature_names(s.kind).end());
        os << to_string(s.kind) << " n=" << s.n << "  features: " << join(names, " ") << '\n';
        for (const auto& r : runs) {
            os << r.name << " (lex order)\n";
            for (const auto& rec : r.lex)
                os << "  " << std::setw(4) << rec.isol << std::setw(6) << rec.nback << "  "
                   << (rec.sentinel() ? "-" : values_str(rec.sol)) << '\n';
        }
        os << "nback with bounds <= without on every shared row: " << (dominated ? "yes" : "no") << '\n';
        text = os.str();
    }
    emit(cfg.common, out, text);
    return Ok;
}

//------------------------------------------------------------------ explain

// Prefix string as an indented tree; subtrees that fit stay on one line.
struct Sexp {
    std::string atom;
    std::vector<Sexp> kids;
    std::string flat;
};

Sexp parse_sexp(const std::string& s, std::size_t& i)
{
    Sexp node;
    const auto start = i;
    if (s[i] == '(') {
        ++i;
        while (i < s.size() && s[i] != ')') {
            if (s[i] == ' ')
                ++i;
            else
                node.kids.push_back(parse_sexp(s, i));
        }
        ++i;
    } else {
        while (i < s.size() && s[i] != ' ' && s[i] != ')')
            node.atom += s[i++];
    }
    node.flat = s.substr(start, i - start);
    return node;
}

void render(const Sexp& e, std::size_t depth, std::ostream& os)
{
    const std::string pad(2 * depth, ' ');
    if (e.kids.empty() || e.flat.size() + pad.size() <= 60) {
        os << pad << e.flat << '\n';
        return;
    }
    os << pad << e.kids.front().flat << '\n';
    for (std::size_t k = 1; k < e.kids.size(); ++k)
        render(e.kids[k], depth + 1, os);
}

std::string tree(const std::string& prefix)
{
    std::size_t i = 0;
    std::ostringstream os;
    render(parse_sexp(prefix, i), 0, os);
    return os.str();
}

int cmd_explain(const Common& common, const std::optional<std::string>& id, std::ostream& out)
{
    if (!id) {
        emit(common, out, catalog_json(catalog()) + "\n");
        return Ok;
    }
    BoundCandidate b;
    if (id->rfind("decoy:", 0) == 0)
        throw UsageError("explain takes a catalog id");
    b = bound_of(*id);
    const std::vector<BoundCandidate> one{b};
    std::string text;
    const auto rhs = to_prefix(b.rhs, b.object);
    std::vector<std::string> inputs;
    for (auto f : b.inputs())
        inputs.emplace_back(feature_names(b.object)[f]);
    if (common.format == "json") {
        auto j = json::parse(catalog_json(one)).at(0);
        j["label"] = b.label;
        j["inputs"] = inputs;
        text = j.dump(2) + "\n";
    } else if (common.format == "csv") {
        text = "id,object,target,direction,rhs,label\n" + b.id + "," + std::string(to_string(b.object)) + "," +
               std::string(b.target_name()) + "," + std::string(to_string(b.direction)) + ",\"" + rhs + "\",\"" +
               b.label + "\"\n";
    } else {
        std::ostringstream os;
        os << b.id << "  (" << to_string(b.object) << ")\n"
           << "  " << b.label << '\n'
           << "  " << b.target_name() << (b.direction == Direction::Upper ? " <= " : " >= ") << "rhs, rhs reads "
           << join(inputs, " ") << "\n\n"
           << tree(rhs);
        text = os.str();
    }
    emit(common, out, text);
    return Ok;
}

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--format", c.format, "json, csv or text")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    sub->add_option("--out", c.out, "write here instead of stdout");
}

void add_scenario(CLI::App* sub, ScenarioCfg& c)
{
    add_common(sub, c.common);
    sub->add_option("--object", c.object, "partition or binseq")->required();
    sub->add_option("--n", c.n, "object size")->required();
    sub->add_option("--candidates", c.candidates, "candidate list file: one id per line, # comments, decoy:FEATURE");
    sub->add_option("--shuffle-seed", c.seed, "shuffle the candidate list with this seed");
    sub->add_flag("--no-timing", c.no_timing, "report wall_ms as 0");
}

} // namespace

Hooks default_hooks()
{
    return {[](const CtrSpec& c, std::span<const Candidate> b) { return selection(c, b); },
            [](const CtrSpec& c, std::span<const Candidate> b) { return baseline_selection(c, b); }};
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err, const Hooks& hooks)
{
    CLI::App app{"Bound catalog verification and selection", "boundforge"};
    app.require_subcommand(1);

    VerifyCfg verify;
    auto* v = app.add_subcommand("verify", "audit bounds against every object of each size");
    add_common(v, verify.common);
    v->add_option("--object", verify.object, "partition or binseq");
    v->add_option("--bound", verify.bounds, "bound id, repeatable");
    v->add_option("--n", verify.n, "size or range lo..hi");

    ScenarioCfg select, compare, sols;
    auto* s = app.add_subcommand("select", "incremental selection");
    add_scenario(s, select);
    auto* c = app.add_subcommand("compare", "incremental against baseline");
    add_scenario(c, compare);
    auto* so = app.add_subcommand("solutions", "solution records with and without bounds");
    add_scenario(so, sols);

    Common explain;
    std::optional<std::string> explain_id;
    auto* e = app.add_subcommand("explain", "show a bound, or the whole catalog as JSON");
    add_common(e, explain);
    e->add_option("id", explain_id, "bound id");

    std::vector<std::string> argv_store{"boundforge"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& pe) {
        return app.exit(pe, out, err) == 0 ? Ok : Usage;
    }

    try {
        if (*v)
            return cmd_verify(verify, out);
        if (*s)
            return cmd_select(select, out, hooks);
        if (*c)
            return cmd_compare(compare, out, hooks);
        if (*so)
            return cmd_solutions(sols, out);
        return cmd_explain(explain, explain_id, out);
    } catch (const UsageError& ue) {
        err << "boundforge: " << ue.what() << '\n';
        return Usage;
    } catch (const Error& be) {
        err << "boundforge: " << be.what() << '\n';
        return Failed;
    }
}

} // namespace boundforge::cli
