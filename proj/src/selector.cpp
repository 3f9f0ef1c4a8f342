#include "boundforge/selector.hpp"

#include "boundforge/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>

namespace boundforge {

Candidate make_candidate(const BoundCandidate& b, Value n)
{
    return {b.id, [b, n](Model& m, std::span<const VarRef> fv) { return post_bound(m, b, fv, n); }};
}

std::vector<Candidate> make_candidates(std::span<const BoundCandidate> bs, Value n)
{
    std::vector<Candidate> out;
    out.reserve(bs.size());
    for (const auto& b : bs)
        out.push_back(make_candidate(b, n));
    return out;
}

CtrSpec object_ctr(ObjectKind k, Value n)
{
    const Value lo = k == ObjectKind::Partition ? 1 : 0;
    if (n < lo || n > kMaxModelN)
        throw Error(ErrorCode::InvalidArgument, std::string(to_string(k)) + " model needs " + std::to_string(lo) +
                                                    " <= n <= " + std::to_string(kMaxModelN));
    return {std::string(to_string(k)) + "(" + std::to_string(n) + ")",
            [k, n](Model& m) { return declare_object(m, k, n); },
            [k](Model& m, const VarLayout& l) { return post_object(m, k, l); }};
}

std::string report_json(const SelectionReport& r, int indent)
{
    nlohmann::json j{{"selected", r.selected}, {"posts", r.posts}, {"labelings", r.labelings}, {"wall_ms", r.wall_ms}};
    return j.dump(indent);
}

std::vector<SolutionRecord> enumerate_all_solutions(Model& model, std::span<const VarRef> featvars,
                                                    std::span<const VarRef> xs, std::uint64_t* labelings)
{
    std::vector<SolutionRecord> sols;
    std::vector<Value> last;
    const auto m = model.mark();
    for (std::size_t isol = 0;; ++isol) {
        if (isol > 0 && !model.post_lex_greater(featvars, last)) {
            sols.push_back({isol, 0, {}});
            break;
        }
        auto r = model.labeling(featvars, xs);
        if (labelings)
            ++*labelings;
        if (isol > 0)
            model.retract_to(m);
        if (r.finished) {
            sols.push_back({isol, r.nback, {}});
            break;
        }
        sols.push_back({isol, r.nback, r.sol});
        last = std::move(r.sol);
    }
    model.retract_to(m);
    return sols;
}

void sort_by_nback(std::vector<SolutionRecord>& recs)
{
    std::stable_sort(recs.begin(), recs.end(), [](const SolutionRecord& a, const SolutionRecord& b) {
        return a.nback != b.nback ? a.nback < b.nback : a.isol < b.isol;
    });
}

std::size_t split_point(std::size_t len)
{
    if (len > 200)
        return len - 100;
    if (len < 3)
        return (len + 1) / 2;
    return (2 * len + 2) / 3;
}

namespace {

const SolutionRecord& by_isol(std::span<const SolutionRecord> all, std::size_t isol)
{
    for (const auto& r : all)
        if (r.isol == isol)
            return r;
    throw Error(ErrorCode::InternalInvariant, "no solution record " + std::to_string(isol));
}

// Observed backtracks for the record: lex-greater than its predecessor, then
// label. A failing lex post counts as 0.
std::uint64_t replay(Model& model, std::span<const VarRef> featvars, std::span<const VarRef> xs,
                     std::span<const SolutionRecord> all, const SolutionRecord& rec, SelectionStats& st)
{
    const LabelOptions opts{rec.nback};
    if (rec.isol == 0) {
        ++st.labelings;
        return model.labeling(featvars, xs, opts).nback;
    }
    const auto& pred = by_isol(all, rec.isol - 1);
    const auto m = model.mark();
    ++st.lex_posts;
    std::uint64_t seen = 0;
    if (model.post_lex_greater(featvars, pred.sol)) {
        ++st.labelings;
        seen = model.labeling(featvars, xs, opts).nback;
    }
    model.retract_to(m);
    return seen;
}

} // namespace

Selector::Selector(Model& model, std::span<const VarRef> featvars, std::span<const VarRef> xs,
                   std::span<const Candidate> candidates)
    : model_(model)
    , featvars_(featvars.begin(), featvars.end())
    , xs_(xs.begin(), xs.end())
    , cands_(candidates)
{
    stats_.slot_posts.assign(cands_.size(), 0);
    stats_.prev_posts.assign(cands_.size(), 0);
    copies_.assign(cands_.size(), 0);
}

void Selector::post_slot(std::size_t slot)
{
    live_.push_back(slot);
    stats_.max_live = std::max(stats_.max_live, ++copies_[slot]);
    ++stats_.posts;
    ++stats_.slot_posts[slot];
    if (in_top_)
        ++stats_.top_level_posts.back()[slot];
    if (!cands_[slot].post(model_, featvars_))
        throw Error(ErrorCode::CatalogSoundness, "posting " + cands_[slot].id + " failed");
}

void Selector::retract(const TrailMark& m, std::size_t live)
{
    model_.retract_to(m);
    for (; live_.size() > live; live_.pop_back())
        --copies_[live_.back()];
}

std::vector<SolutionRecord> Selector::compute_all_solutions()
{
    const auto live = live_.size();
    const auto m = model_.mark();
    for (std::size_t s = 0; s < cands_.size(); ++s)
        post_slot(s);
    auto sols = enumerate_all_solutions(model_, featvars_, xs_, &stats_.labelings);
    stats_.lex_posts += sols.size() - 1;
    sort_by_nback(sols);
    retract(m, live);
    return sols;
}

std::vector<std::size_t> Selector::select(Sols sols, std::vector<std::size_t> bounds, std::optional<std::size_t> prev)
{
    std::vector<std::size_t> out;
    for (;;) {
        if (prev) {
            ++stats_.prev_posts[*prev];
            post_slot(*prev);
        }
        auto pick = select_one(true, sols, sols, bounds);
        if (!pick.selected)
            return out;
        out.push_back(*pick.selected);
        if (pick.rest.empty())
            return out;
        bounds = std::move(pick.rest);
        prev = pick.selected;
    }
}

Selector::Pick Selector::select_one(bool top, Sols sols, Sols all, const std::vector<std::size_t>& bounds)
{
    if (bounds.empty())
        throw Error(ErrorCode::InvalidArgument, "select_one needs at least one candidate");
    const auto len = bounds.size();
    const auto mid = static_cast<std::ptrdiff_t>(split_point(len));
    const std::vector<std::size_t> prefix(bounds.begin(), bounds.begin() + mid);
    const std::vector<std::size_t> suffix(bounds.begin() + mid, bounds.end());
    if (!top)
        return dicho(sols, all, len, prefix, suffix);
    stats_.top_level_posts.emplace_back(cands_.size(), 0);
    in_top_ = true;
    const auto live = live_.size();
    const auto m = model_.mark();
    auto pick = dicho(sols, all, len, prefix, suffix);
    retract(m, live);
    in_top_ = false;
    return pick;
}

Selector::Pick Selector::dicho(Sols sols, Sols all, std::size_t len, const std::vector<std::size_t>& prefix,
                               const std::vector<std::size_t>& suffix)
{
    const auto live = live_.size();
    const auto m = model_.mark();
    for (auto s : suffix)
        post_slot(s);
    const auto [rest, missing] = enumerate(sols, all);
    if (missing && len > 1) {
        auto pick = select_one(false, rest, all, prefix);
        pick.rest.insert(pick.rest.end(), suffix.begin(), suffix.end());
        return pick;
    }
    retract(m, live);
    if (len == 1)
        return missing ? Pick{prefix.front(), {}} : Pick{std::nullopt, prefix};
    return select_one(false, sols, all, suffix);
}

std::pair<Selector::Sols, bool> Selector::enumerate(Sols sols, Sols all)
{
    for (std::size_t i = 0; i < sols.size(); ++i)
        if (replay(model_, featvars_, xs_, all, sols[i], stats_) != sols[i].nback)
            return {sols.subspan(i), true};
    return {{}, false};
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(Clock::time_point t0)
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

void fill_ids(SelectionReport& r, std::span<const Candidate> bounds)
{
    for (auto s : r.selected_slots)
        r.selected.push_back(bounds[s].id);
}

} // namespace

SelectionReport selection(Model& model, const CtrSpec& ctr, const VarLayout& layout, std::span<const Candidate> bounds)
{
    const auto t0 = Clock::now();
    SelectionReport r;
    Selector sel(model, layout.featvars, layout.xs, bounds);
    if (!ctr.post(model, layout))
        throw Error(ErrorCode::InfeasibleModel, ctr.name + " failed to post");
    r.all_sols = sel.compute_all_solutions();
    if (!bounds.empty()) {
        std::vector<std::size_t> slots(bounds.size());
        for (std::size_t i = 0; i < slots.size(); ++i)
            slots[i] = i;
        r.selected_slots = sel.select(r.all_sols, std::move(slots), std::nullopt);
    }
    fill_ids(r, bounds);
    r.stats = sel.stats();
    r.stats.ctr_posts = 1;
    r.posts = ++r.stats.posts;
    r.labelings = r.stats.labelings;
    r.wall_ms = ms_since(t0);
    return r;
}

SelectionReport selection(const CtrSpec& ctr, std::span<const Candidate> bounds)
{
    Model model;
    const auto layout = ctr.declare(model);
    return selection(model, ctr, layout, bounds);
}

namespace {

// Fresh-model reference. It keeps the list of what the incremental version
// would have posted and rebuilds a model from it for every enumerate.
class Baseline {
public:
    Baseline(const CtrSpec& ctr, std::span<const Candidate> cands)
        : ctr_(ctr)
        , cands_(cands)
    {
        stats_.slot_posts.assign(cands.size(), 0);
        stats_.prev_posts.assign(cands.size(), 0);
    }

    std::vector<SolutionRecord> compute_all()
    {
        std::vector<std::size_t> all(cands_.size());
        for (std::size_t i = 0; i < all.size(); ++i)
            all[i] = i;
        Model m;
        const auto layout = build(m, all);
        auto sols = enumerate_all_solutions(m, layout.featvars, layout.xs, &stats_.labelings);
        stats_.lex_posts += sols.size() - 1;
        sort_by_nback(sols);
        return sols;
    }

    std::vector<std::size_t> select(const std::vector<SolutionRecord>& sols, std::vector<std::size_t> bounds)
    {
        sols_ = &sols;
        std::vector<std::size_t> out;
        while (!bounds.empty()) {
            posted_.clear();
            stats_.top_level_posts.emplace_back(cands_.size(), 0);
            auto [picked, rest] = select_one(bounds);
            if (!picked)
                break;
            out.push_back(*picked);
            chosen_.push_back(*picked);
            ++stats_.prev_posts[*picked];
            bounds = std::move(rest);
        }
        return out;
    }

    const SelectionStats& stats() const { return stats_; }

private:
    using Pick = std::pair<std::optional<std::size_t>, std::vector<std::size_t>>;

    Pick select_one(const std::vector<std::size_t>& bounds)
    {
        const auto mid = static_cast<std::ptrdiff_t>(split_point(bounds.size()));
        const std::vector<std::size_t> prefix(bounds.begin(), bounds.begin() + mid);
        const std::vector<std::size_t> suffix(bounds.begin() + mid, bounds.end());
        const auto len = bounds.size();

        const auto depth = posted_.size();
        posted_.insert(posted_.end(), suffix.begin(), suffix.end());
        const bool missing = trial();
        if (missing && len > 1) {
            auto [picked, rest] = select_one(prefix);
            rest.insert(rest.end(), suffix.begin(), suffix.end());
            return {picked, rest};
        }
        posted_.resize(depth);
        if (len == 1)
            return missing ? Pick{prefix.front(), {}} : Pick{std::nullopt, prefix};
        return select_one(suffix);
    }

    // Every record from the first, on a model built from scratch.
    bool trial()
    {
        auto set = chosen_;
        set.insert(set.end(), posted_.begin(), posted_.end());
        Model m;
        const auto layout = build(m, set);
        for (const auto& rec : *sols_) {
            std::uint64_t seen = 0;
            const LabelOptions opts{rec.nback};
            if (rec.isol == 0) {
                ++stats_.labelings;
                seen = m.labeling(layout.featvars, layout.xs, opts).nback;
            } else {
                const auto& pred = by_isol(*sols_, rec.isol - 1);
                const auto mk = m.mark();
                ++stats_.lex_posts;
                if (m.post_lex_greater(layout.featvars, pred.sol)) {
                    ++stats_.labelings;
                    seen = m.labeling(layout.featvars, layout.xs, opts).nback;
                }
                m.retract_to(mk);
            }
            if (seen != rec.nback)
                return true;
        }
        return false;
    }

    VarLayout build(Model& m, const std::vector<std::size_t>& slots)
    {
        const auto layout = ctr_.declare(m);
        ++stats_.posts;
        ++stats_.ctr_posts;
        if (!ctr_.post(m, layout))
            throw Error(ErrorCode::InfeasibleModel, ctr_.name + " failed to post");
        for (auto s : slots) {
            ++stats_.posts;
            ++stats_.slot_posts[s];
            if (!stats_.top_level_posts.empty())
                ++stats_.top_level_posts.back()[s];
            if (!cands_[s].post(m, layout.featvars))
                throw Error(ErrorCode::CatalogSoundness, "posting " + cands_[s].id + " failed");
        }
        return layout;
    }

    const CtrSpec& ctr_;
    std::span<const Candidate> cands_;
    const std::vector<SolutionRecord>* sols_ = nullptr;
    std::vector<std::size_t> chosen_;
    std::vector<std::size_t> posted_;
    SelectionStats stats_;
};

} // namespace

SelectionReport baseline_selection(const CtrSpec& ctr, std::span<const Candidate> bounds)
{
    const auto t0 = Clock::now();
    SelectionReport r;
    Baseline b(ctr, bounds);
    r.all_sols = b.compute_all();
    std::vector<std::size_t> slots(bounds.size());
    for (std::size_t i = 0; i < slots.size(); ++i)
        slots[i] = i;
    r.selected_slots = b.select(r.all_sols, std::move(slots));
    fill_ids(r, bounds);
    r.stats = b.stats();
    r.posts = r.stats.posts;
    r.labelings = r.stats.labelings;
    r.wall_ms = ms_since(t0);
    return r;
}

std::vector<SolutionRecord> enumerate_with(const CtrSpec& ctr, std::span<const Candidate> posted)
{
    Model m;
    const auto layout = ctr.declare(m);
    if (!ctr.post(m, layout))
        throw Error(ErrorCode::InfeasibleModel, ctr.name + " failed to post");
    for (const auto& c : posted)
        if (!c.post(m, layout.featvars))
            throw Error(ErrorCode::CatalogSoundness, "posting " + c.id + " failed");
    return enumerate_all_solutions(m, layout.featvars, layout.xs);
}

} // namespace boundforge
