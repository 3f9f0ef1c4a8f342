#include "boundforge/objects.hpp"

#include "boundforge/error.hpp"
#include "propagators.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

namespace boundforge {
namespace {

constexpr std::array<std::string_view, kPartitionFeatures> kPartitionNames{"P", "Mmin", "Mmax", "rangeM", "S"};
constexpr std::array<std::string_view, kBinSeqFeatures> kBinSeqNames{
    "N1", "G", "Gmin", "Gmax", "rangeG", "GS", "Dmin", "Dmax", "rangeD", "DS"};

// Every object of size n with its features, built once per n and shared.
template <std::size_t K>
struct Entry {
    std::array<Value, K> f;
    std::uint32_t mask = 0; // BinSeq: bit i is x_i
    PartSizes sizes;        // Partition: non-increasing
};

template <std::size_t K>
using Table = std::vector<Entry<K>>;

void grow_partitions(Value left, Value cap, PartSizes& cur, Table<kPartitionFeatures>& out)
{
    if (left == 0) {
        out.push_back({partition_features(cur).values(), 0, cur});
        return;
    }
    for (Value v = std::min(left, cap); v >= 1; --v) {
        cur.push_back(v);
        grow_partitions(left - v, v, cur, out);
        cur.pop_back();
    }
}

template <class T, class Build>
std::shared_ptr<const T> cached(Value n, Build build)
{
    static std::mutex mu;
    static std::map<Value, std::shared_ptr<const T>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[n];
    if (!slot)
        slot = std::make_shared<const T>(build(n));
    return slot;
}

std::shared_ptr<const Table<kPartitionFeatures>> partition_table(Value n)
{
    return cached<Table<kPartitionFeatures>>(n, [](Value n) {
        Table<kPartitionFeatures> t;
        PartSizes cur;
        grow_partitions(n, n, cur, t);
        return t;
    });
}

std::shared_ptr<const Table<kBinSeqFeatures>> binseq_table(Value n)
{
    return cached<Table<kBinSeqFeatures>>(n, [](Value n) {
        Table<kBinSeqFeatures> t;
        const std::uint32_t count = std::uint32_t{1} << n;
        t.reserve(count);
        std::vector<Value> bits(static_cast<std::size_t>(n));
        for (std::uint32_t mask = 0; mask < count; ++mask) {
            for (Value i = 0; i < n; ++i)
                bits[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
            t.push_back({binseq_features(bits).values(), mask, {}});
        }
        return t;
    });
}

template <std::size_t K>
bool features_fit(const Model& m, std::span<const VarRef> featvars, const std::array<Value, K>& f)
{
    for (std::size_t k = 0; k < K; ++k)
        if (!m.dom(featvars[k]).contains(f[k]))
            return false;
    return true;
}

bool all_fixed(const Model& m, std::span<const VarRef> vars)
{
    return std::all_of(vars.begin(), vars.end(), [&](VarRef v) { return m.fixed(v); });
}

bool keep_only(Model& m, VarRef v, const std::vector<char>& seen, Value base)
{
    for (auto x : m.dom(v).values()) {
        const auto off = x - base;
        const bool ok = off >= 0 && off < static_cast<Value>(seen.size()) && seen[static_cast<std::size_t>(off)];
        if (!ok && !m.remove_value(v, x))
            return false;
    }
    return true;
}

// X_1 = 1, X_i <= max(X_1..X_{i-1}) + 1, and labels never exceed P.
class PrecedenceProp final : public Propagator {
public:
    PrecedenceProp(VarRef parts, std::vector<VarRef> xs)
        : parts_(parts)
        , xs_(std::move(xs))
    {
    }
    ConstraintKind kind() const override { return ConstraintKind::Partition; }
    std::vector<VarRef> scope() const override
    {
        auto s = xs_;
        s.push_back(parts_);
        return s;
    }

    bool propagate(Model& m) override
    {
        if (xs_.empty())
            return true;
        if (!m.assign(xs_[0], 1))
            return false;
        Value reach = 1;
        Value used = 1;
        for (std::size_t i = 1; i < xs_.size(); ++i) {
            const VarRef x = xs_[i];
            if (!m.set_min(x, 1) || !m.set_max(x, std::min(reach + 1, m.dom(parts_).max())))
                return false;
            reach = std::max(reach, m.dom(x).max());
            used = std::max(used, m.dom(x).min());
        }
        return m.set_min(parts_, used);
    }

private:
    VarRef parts_;
    std::vector<VarRef> xs_;
};

// Restricted-growth labelings of the xs whose block sizes form one of the
// target multisets.
class LabelSearch {
public:
    LabelSearch(const Model& m, std::span<const VarRef> xs, Value parts, std::vector<const PartSizes*> targets)
        : m_(m)
        , xs_(xs)
        , parts_(parts)
        , targets_(std::move(targets))
        , labels_(xs.size())
    {
    }

    bool find(std::optional<std::pair<std::size_t, Value>> forced)
    {
        forced_ = forced;
        blocks_.clear();
        return dfs(0);
    }
    const std::vector<Value>& labels() const { return labels_; }

private:
    bool dfs(std::size_t i)
    {
        if (i == xs_.size())
            return static_cast<Value>(blocks_.size()) == parts_;
        const auto open = static_cast<Value>(blocks_.size());
        const auto try_value = [&](Value v) {
            if (v < 1 || v > std::min(open + 1, parts_))
                return false;
            if (v == open + 1)
                blocks_.push_back(1);
            else
                ++blocks_[static_cast<std::size_t>(v - 1)];
            labels_[i] = v;
            const bool ok = viable(i + 1) && dfs(i + 1);
            if (v == open + 1)
                blocks_.pop_back();
            else
                --blocks_[static_cast<std::size_t>(v - 1)];
            return ok;
        };
        if (forced_ && forced_->first == i)
            return m_.dom(xs_[i]).contains(forced_->second) && try_value(forced_->second);
        for (auto v : m_.dom(xs_[i]).values())
            if (try_value(v))
                return true;
        return false;
    }

    bool viable(std::size_t filled)
    {
        const auto k = blocks_.size();
        const auto left = static_cast<Value>(xs_.size() - filled);
        if (parts_ - static_cast<Value>(k) > left)
            return false;
        sorted_ = blocks_;
        std::sort(sorted_.rbegin(), sorted_.rend());
        for (auto* t : targets_) {
            bool fits = true;
            for (std::size_t j = 0; j < k && fits; ++j)
                fits = sorted_[j] <= (*t)[j];
            if (fits)
                return true;
        }
        return false;
    }

    const Model& m_;
    std::span<const VarRef> xs_;
    Value parts_;
    std::vector<const PartSizes*> targets_;
    std::vector<Value> labels_;
    std::vector<Value> blocks_;
    std::vector<Value> sorted_;
    std::optional<std::pair<std::size_t, Value>> forced_;
};

class PartitionWitnessProp final : public Propagator {
public:
    PartitionWitnessProp(std::vector<VarRef> featvars, std::vector<VarRef> xs)
        : featvars_(std::move(featvars))
        , xs_(std::move(xs))
        , table_(partition_table(static_cast<Value>(xs_.size())))
    {
    }
    ConstraintKind kind() const override { return ConstraintKind::Partition; }
    std::vector<VarRef> scope() const override
    {
        auto s = featvars_;
        s.insert(s.end(), xs_.begin(), xs_.end());
        return s;
    }

    bool propagate(Model& m) override
    {
        if (all_fixed(m, xs_)) {
            std::vector<Value> sizes;
            for (auto x : xs_) {
                const auto label = static_cast<std::size_t>(m.value(x));
                if (label < 1)
                    return false;
                if (sizes.size() < label)
                    sizes.resize(label, 0);
                ++sizes[label - 1];
            }
            if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end())
                return false;
            const auto f = partition_features(sizes).values();
            for (std::size_t k = 0; k < f.size(); ++k)
                if (!m.assign(featvars_[k], f[k]))
                    return false;
            return true;
        }

        std::vector<const PartSizes*> targets;
        for (const auto& e : *table_)
            if (features_fit(m, featvars_, e.f))
                targets.push_back(&e.sizes);
        if (targets.empty())
            return false;
        if (!all_fixed(m, featvars_))
            return true;

        const auto n = xs_.size();
        LabelSearch search(m, xs_, m.value(featvars_[0]), std::move(targets));
        std::vector<std::vector<char>> seen(n, std::vector<char>(n + 1, 0));
        const auto record = [&] {
            for (std::size_t j = 0; j < n; ++j)
                seen[j][static_cast<std::size_t>(search.labels()[j])] = 1;
        };
        if (!search.find(std::nullopt))
            return false;
        record();
        for (std::size_t i = 0; i < n; ++i)
            for (auto v : m.dom(xs_[i]).values())
                if (v >= 1 && v <= static_cast<Value>(n) && !seen[i][static_cast<std::size_t>(v)] &&
                    search.find(std::pair{i, v}))
                    record();
        for (std::size_t i = 0; i < n; ++i)
            if (!keep_only(m, xs_[i], seen[i], 0))
                return false;
        return true;
    }

private:
    std::vector<VarRef> featvars_;
    std::vector<VarRef> xs_;
    std::shared_ptr<const Table<kPartitionFeatures>> table_;
};

class BinSeqWitnessProp final : public Propagator {
public:
    BinSeqWitnessProp(std::vector<VarRef> featvars, std::vector<VarRef> xs)
        : featvars_(std::move(featvars))
        , xs_(std::move(xs))
        , table_(binseq_table(static_cast<Value>(xs_.size())))
    {
    }
    ConstraintKind kind() const override { return ConstraintKind::BinSeq; }
    std::vector<VarRef> scope() const override
    {
        auto s = featvars_;
        s.insert(s.end(), xs_.begin(), xs_.end());
        return s;
    }

    bool propagate(Model& m) override
    {
        const auto n = xs_.size();
        std::uint32_t allow0 = 0;
        std::uint32_t allow1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (m.dom(xs_[i]).contains(0))
                allow0 |= std::uint32_t{1} << i;
            if (m.dom(xs_[i]).contains(1))
                allow1 |= std::uint32_t{1} << i;
        }
        const std::uint32_t full = n == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1;
        const bool prune = all_fixed(m, featvars_) || all_fixed(m, xs_);

        std::uint32_t seen0 = 0;
        std::uint32_t seen1 = 0;
        std::vector<std::vector<char>> fseen;
        std::vector<Value> fbase;
        if (prune)
            for (auto v : featvars_) {
                fbase.push_back(m.dom(v).min());
                fseen.emplace_back(static_cast<std::size_t>(m.dom(v).max() - m.dom(v).min() + 1), 0);
            }
        bool any = false;
        for (const auto& e : *table_) {
            if ((e.mask & ~allow1) != 0 || (~e.mask & full & ~allow0) != 0)
                continue;
            if (!features_fit(m, featvars_, e.f))
                continue;
            any = true;
            if (!prune)
                break;
            seen1 |= e.mask;
            seen0 |= ~e.mask & full;
            for (std::size_t k = 0; k < e.f.size(); ++k)
                fseen[k][static_cast<std::size_t>(e.f[k] - fbase[k])] = 1;
        }
        if (!any)
            return false;
        if (!prune)
            return true;
        for (std::size_t i = 0; i < n; ++i) {
            const std::vector<char> bit{static_cast<char>((seen0 >> i) & 1u), static_cast<char>((seen1 >> i) & 1u)};
            if (!keep_only(m, xs_[i], bit, 0))
                return false;
        }
        for (std::size_t k = 0; k < featvars_.size(); ++k)
            if (!keep_only(m, featvars_[k], fseen[k], fbase[k]))
                return false;
        return true;
    }

private:
    std::vector<VarRef> featvars_;
    std::vector<VarRef> xs_;
    std::shared_ptr<const Table<kBinSeqFeatures>> table_;
};

// hi - lo = range
std::unique_ptr<Propagator> difference(VarRef hi, VarRef lo, VarRef range)
{
    return detail::make_propagator(Linear{{1, -1, -1}, {hi, lo, range}, Relation::Eq, 0});
}

void check_layout(std::span<const VarRef> featvars, std::size_t want, const char* what)
{
    if (featvars.size() != want)
        throw Error(ErrorCode::InvalidArgument, std::string(what) + ": expected " + std::to_string(want) +
                                                    " feature variables, got " + std::to_string(featvars.size()));
}

} // namespace

std::string_view to_string(ObjectKind k) noexcept
{
    return k == ObjectKind::Partition ? "partition" : "binseq";
}

std::optional<ObjectKind> parse_object(std::string_view s) noexcept
{
    if (s == "partition")
        return ObjectKind::Partition;
    if (s == "binseq")
        return ObjectKind::BinSeq;
    return std::nullopt;
}

std::size_t feature_count(ObjectKind k) noexcept
{
    return k == ObjectKind::Partition ? kPartitionFeatures : kBinSeqFeatures;
}

std::span<const std::string_view> feature_names(ObjectKind k) noexcept
{
    if (k == ObjectKind::Partition)
        return kPartitionNames;
    return kBinSeqNames;
}

std::optional<std::size_t> feature_index(ObjectKind k, std::string_view name) noexcept
{
    const auto names = feature_names(k);
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

PartitionFeatures partition_features(std::span<const Value> sizes)
{
    if (sizes.empty())
        throw Error(ErrorCode::InvalidInput, "partition needs at least one part");
    PartitionFeatures f;
    f.P = static_cast<Value>(sizes.size());
    f.Mmin = f.Mmax = sizes[0];
    for (auto s : sizes) {
        if (s < 1)
            throw Error(ErrorCode::InvalidInput, "part size " + std::to_string(s) + " is not positive");
        f.n += s;
        f.S += s * s;
        f.Mmin = std::min(f.Mmin, s);
        f.Mmax = std::max(f.Mmax, s);
    }
    f.rangeM = f.Mmax - f.Mmin;
    return f;
}

BinSeqFeatures binseq_features(std::span<const Value> bits)
{
    BinSeqFeatures f;
    f.n = static_cast<Value>(bits.size());
    std::vector<Value> stretches;
    std::vector<Value> gaps;
    Value run = 0;
    Value zeros = 0;
    for (auto b : bits) {
        if (b != 0 && b != 1)
            throw Error(ErrorCode::InvalidInput, "binary sequence holds " + std::to_string(b));
        if (b == 1) {
            if (run == 0 && !stretches.empty())
                gaps.push_back(zeros);
            ++run;
            zeros = 0;
        } else {
            if (run > 0)
                stretches.push_back(run);
            run = 0;
            ++zeros;
        }
    }
    if (run > 0)
        stretches.push_back(run);

    f.G = static_cast<Value>(stretches.size());
    if (!stretches.empty()) {
        f.Gmin = *std::min_element(stretches.begin(), stretches.end());
        f.Gmax = *std::max_element(stretches.begin(), stretches.end());
    }
    for (auto s : stretches) {
        f.N1 += s;
        f.GS += s * s;
    }
    if (!gaps.empty()) {
        f.Dmin = *std::min_element(gaps.begin(), gaps.end());
        f.Dmax = *std::max_element(gaps.begin(), gaps.end());
    }
    for (auto d : gaps)
        f.DS += d * d;
    f.rangeG = f.Gmax - f.Gmin;
    f.rangeD = f.Dmax - f.Dmin;
    return f;
}

std::vector<std::pair<Value, Value>> initial_feature_domains(ObjectKind k, Value n)
{
    if (k == ObjectKind::Partition) {
        if (n < 1)
            throw Error(ErrorCode::InvalidArgument, "partition needs n >= 1");
        return {{1, n}, {1, n}, {1, n}, {0, n - 1}, {n, n * n}};
    }
    if (n < 0)
        throw Error(ErrorCode::InvalidArgument, "binseq needs n >= 0");
    const Value gap = std::max<Value>(n - 2, 0);
    return {{0, n},
            {0, (n + 1) / 2},
            {0, n},
            {0, n},
            {0, std::max<Value>(n - 1, 0)},
            {0, n * n},
            {0, gap},
            {0, gap},
            {0, gap},
            {0, gap * gap}};
}

VarLayout declare_object(Model& model, ObjectKind k, Value n)
{
    if (n > kMaxModelN)
        throw Error(ErrorCode::InvalidArgument,
                    "n=" + std::to_string(n) + " exceeds the model limit of " + std::to_string(kMaxModelN));
    VarLayout out;
    for (auto [lo, hi] : initial_feature_domains(k, n))
        out.featvars.push_back(model.new_var(lo, hi));
    for (Value i = 0; i < n; ++i)
        out.xs.push_back(k == ObjectKind::Partition ? model.new_var(1, n) : model.new_var(0, 1));
    return out;
}

PostResult post_partition(Model& model, std::span<const VarRef> featvars, std::span<const VarRef> xs)
{
    check_layout(featvars, kPartitionFeatures, "partition");
    if (xs.empty() || static_cast<Value>(xs.size()) > kMaxModelN)
        throw Error(ErrorCode::InvalidArgument, "partition: element count out of range");
    std::vector<VarRef> fv(featvars.begin(), featvars.end());
    std::vector<VarRef> x(xs.begin(), xs.end());
    std::vector<std::unique_ptr<Propagator>> group;
    group.push_back(difference(fv[2], fv[1], fv[3]));
    group.push_back(std::make_unique<PrecedenceProp>(fv[0], x));
    group.push_back(std::make_unique<PartitionWitnessProp>(fv, x));
    return model.post_group(ConstraintKind::Partition, std::move(group));
}

PostResult post_binseq(Model& model, std::span<const VarRef> featvars, std::span<const VarRef> xs)
{
    check_layout(featvars, kBinSeqFeatures, "binseq");
    if (static_cast<Value>(xs.size()) > kMaxModelN)
        throw Error(ErrorCode::InvalidArgument, "binseq: sequence too long");
    std::vector<VarRef> fv(featvars.begin(), featvars.end());
    std::vector<VarRef> x(xs.begin(), xs.end());

    Linear ones;
    ones.coeffs.assign(x.size(), 1);
    ones.vars = x;
    ones.coeffs.push_back(-1);
    ones.vars.push_back(fv[0]);
    ones.rel = Relation::Eq;

    std::vector<std::unique_ptr<Propagator>> group;
    group.push_back(detail::make_propagator(ones));
    group.push_back(difference(fv[3], fv[2], fv[4]));
    group.push_back(difference(fv[7], fv[6], fv[8]));
    group.push_back(std::make_unique<BinSeqWitnessProp>(fv, x));
    return model.post_group(ConstraintKind::BinSeq, std::move(group));
}

PostResult post_object(Model& model, ObjectKind k, const VarLayout& layout)
{
    return k == ObjectKind::Partition ? post_partition(model, layout.featvars, layout.xs)
                                      : post_binseq(model, layout.featvars, layout.xs);
}

} // namespace boundforge
