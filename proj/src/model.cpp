#include "boundforge/model.hpp"

#include "boundforge/error.hpp"
#include "propagators.hpp"

#include <algorithm>
#include <atomic>

namespace boundforge {
namespace {

std::uint64_t next_model_id()
{
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

} // namespace

const ConstraintHandle& PostResult::handle() const
{
    if (!handle_)
        throw Error(ErrorCode::InvalidArgument, "post failed; no constraint handle");
    return *handle_;
}

Model::Model()
    : id_(next_model_id())
{
}

Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;
Model::~Model() = default;

VarRef Model::new_var(Value lo, Value hi)
{
    domains_.emplace_back(lo, hi);
    watchers_.emplace_back();
    saved_stamp_.push_back(0);
    return VarRef{static_cast<std::uint32_t>(domains_.size() - 1)};
}

const Domain& Model::dom(VarRef v) const
{
    if (v.id >= domains_.size())
        throw Error(ErrorCode::InvalidArgument, "variable " + std::to_string(v.id) + " is not part of this model");
    return domains_[v.id];
}

Value Model::value(VarRef v) const
{
    const auto& d = dom(v);
    if (!d.fixed())
        throw Error(ErrorCode::InvalidArgument, "variable " + std::to_string(v.id) + " is not fixed");
    return d.min();
}

Domain& Model::writable(VarRef v)
{
    auto& d = domains_[v.id];
    if (!marks_.empty()) {
        const auto stamp = marks_.back().serial;
        if (saved_stamp_[v.id] != stamp) {
            trail_.push_back(TrailEntry{v.id, d});
            saved_stamp_[v.id] = stamp;
        }
    }
    return d;
}

bool Model::changed(VarRef v)
{
    if (domains_[v.id].empty())
        return false;
    const bool skip_running = running_ && props_[*running_].prop->idempotent();
    for (auto p : watchers_[v.id]) {
        if (skip_running && p == *running_)
            continue;
        if (!queued_[p]) {
            queued_[p] = 1;
            queue_.push_back(p);
        }
    }
    return true;
}

bool Model::set_min(VarRef v, Value lo)
{
    if (lo <= domains_[v.id].min())
        return !domains_[v.id].empty();
    writable(v).remove_below(lo);
    return changed(v);
}

bool Model::set_max(VarRef v, Value hi)
{
    if (hi >= domains_[v.id].max())
        return !domains_[v.id].empty();
    writable(v).remove_above(hi);
    return changed(v);
}

bool Model::remove_value(VarRef v, Value x)
{
    if (!domains_[v.id].contains(x))
        return !domains_[v.id].empty();
    writable(v).remove(x);
    return changed(v);
}

bool Model::assign(VarRef v, Value x)
{
    const auto& d = domains_[v.id];
    if (d.fixed() && d.min() == x)
        return true;
    writable(v).assign(x);
    return changed(v);
}

void Model::clear_queue()
{
    for (auto p : queue_)
        queued_[p] = 0;
    queue_.clear();
    running_.reset();
}

bool Model::run_queue()
{
    std::size_t head = 0;
    while (head < queue_.size()) {
        const auto p = queue_[head++];
        queued_[p] = 0;
        running_ = p;
        const bool ok = props_[p].prop->propagate(*this);
        running_.reset();
        if (!ok) {
            clear_queue();
            return false;
        }
        // Compact occasionally so long fixpoints do not grow the buffer.
        if (head > 1024 && head * 2 > queue_.size()) {
            queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(head));
            head = 0;
        }
    }
    queue_.clear();
    return true;
}

void Model::attach(std::unique_ptr<Propagator> prop)
{
    auto scope = prop->scope();
    for (auto v : scope)
        if (v.id >= domains_.size())
            throw Error(ErrorCode::InvalidArgument,
                        "constraint scope names variable " + std::to_string(v.id) + " outside this model");
    const auto index = static_cast<std::uint32_t>(props_.size());
    std::sort(scope.begin(), scope.end());
    scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
    for (auto v : scope)
        watchers_[v.id].push_back(index);
    props_.push_back(PropEntry{std::move(prop), std::move(scope)});
    queued_.push_back(1);
    queue_.push_back(index);
}

void Model::restore(std::size_t trail_size, std::size_t props_size)
{
    while (trail_.size() > trail_size) {
        auto& e = trail_.back();
        domains_[e.var] = std::move(e.old);
        saved_stamp_[e.var] = 0;
        trail_.pop_back();
    }
    while (props_.size() > props_size) {
        const auto index = static_cast<std::uint32_t>(props_.size() - 1);
        for (auto v : props_.back().scope) {
            auto& w = watchers_[v.id];
            if (!w.empty() && w.back() == index)
                w.pop_back();
        }
        props_.pop_back();
        queued_.pop_back();
    }
}

TrailMark Model::mark()
{
    const auto serial = next_serial_++;
    marks_.push_back(MarkEntry{serial, trail_.size(), props_.size()});
    return TrailMark{id_, serial, trail_.size()};
}

void Model::drop_top_mark()
{
    marks_.pop_back();
    if (marks_.empty())
        trail_.clear();
}

void Model::retract_to(const TrailMark& mark)
{
    if (mark.model != id_)
        throw Error(ErrorCode::InvalidMark, "mark belongs to another model");
    auto it = std::find_if(marks_.rbegin(), marks_.rend(),
                           [&](const MarkEntry& e) { return e.serial == mark.serial; });
    if (it == marks_.rend())
        throw Error(ErrorCode::InvalidMark, "mark " + std::to_string(mark.serial) + " is stale");
    const auto keep = static_cast<std::size_t>(marks_.rend() - it);
    const MarkEntry entry = marks_[keep - 1];
    marks_.resize(keep);
    clear_queue();
    restore(entry.trail, entry.props);
}

PostResult Model::post(const ConstraintSpec& spec)
{
    return post(detail::make_propagator(spec));
}

PostResult Model::post(std::unique_ptr<Propagator> prop)
{
    const auto kind = prop->kind();
    std::vector<std::unique_ptr<Propagator>> group;
    group.push_back(std::move(prop));
    return post_group(kind, std::move(group));
}

PostResult Model::post_group(ConstraintKind kind, std::vector<std::unique_ptr<Propagator>> props)
{
    ++stats_.posts;
    std::vector<VarRef> scope;
    for (const auto& p : props)
        for (auto v : p->scope())
            if (std::find(scope.begin(), scope.end(), v) == scope.end())
                scope.push_back(v);

    mark();
    const auto trail_at = marks_.back().trail;
    const auto props_at = marks_.back().props;
    try {
        for (auto& p : props)
            attach(std::move(p));
    } catch (...) {
        clear_queue();
        restore(trail_at, props_at);
        drop_top_mark();
        throw;
    }
    if (!run_queue()) {
        restore(trail_at, props_at);
        drop_top_mark();
        ++stats_.failed_posts;
        return PostResult::failed();
    }
    drop_top_mark();
    return PostResult(ConstraintHandle{next_constraint_++, kind, std::move(scope)});
}

PostResult Model::post_lex_greater(std::span<const VarRef> vars, std::span<const Value> tuple)
{
    return post(detail::make_lex_greater(vars, tuple));
}

bool Model::search(std::span<const VarRef> vars, std::size_t index, std::uint64_t& nback,
                   const std::optional<std::uint64_t>& limit, bool& truncated)
{
    while (index < vars.size() && domains_[vars[index].id].fixed())
        ++index;
    if (index == vars.size())
        return true;
    const VarRef x = vars[index];
    for (auto v : domains_[x.id].values()) {
        mark();
        const auto trail_at = marks_.back().trail;
        const auto props_at = marks_.back().props;
        if (assign(x, v) && run_queue() && search(vars, index + 1, nback, limit, truncated))
            return true;
        clear_queue();
        restore(trail_at, props_at);
        drop_top_mark();
        if (truncated)
            return false;
        ++nback;
        if (limit && nback > *limit) {
            truncated = true;
            return false;
        }
    }
    return false;
}

LabelResult Model::labeling(std::span<const VarRef> featvars, std::span<const VarRef> xs, LabelOptions options)
{
    ++stats_.labelings;
    std::vector<VarRef> vars(featvars.begin(), featvars.end());
    vars.insert(vars.end(), xs.begin(), xs.end());
    for (auto v : vars)
        (void)dom(v);

    const auto marks_before = marks_.size();
    mark();
    const auto trail_at = marks_.back().trail;
    const auto props_at = marks_.back().props;

    LabelResult result;
    const bool found = search(vars, 0, result.nback, options.max_backtracks, result.truncated);
    if (found) {
        for (auto v : featvars)
            result.sol.push_back(domains_[v.id].min());
        for (auto v : xs)
            result.witness.push_back(domains_[v.id].min());
    } else {
        result.finished = !result.truncated;
    }
    clear_queue();
    restore(trail_at, props_at);
    marks_.resize(marks_before);
    if (marks_.empty())
        trail_.clear();
    return result;
}

} // namespace boundforge
