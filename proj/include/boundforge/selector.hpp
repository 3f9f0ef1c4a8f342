#ifndef BOUNDFORGE_SELECTOR_HPP
#define BOUNDFORGE_SELECTOR_HPP

#include "boundforge/bounds.hpp"
#include "boundforge/model.hpp"
#include "boundforge/objects.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace boundforge {

struct SolutionRecord {
    std::size_t isol = 0;
    std::uint64_t nback = 0;
    /// Feature values; empty for the sentinel.
    std::vector<Value> sol;

    bool sentinel() const noexcept { return sol.empty(); }
    friend bool operator==(const SolutionRecord&, const SolutionRecord&) = default;
};

/// A candidate as the selector sees it: an id and a way to post it on featvars.
struct Candidate {
    std::string id;
    std::function<PostResult(Model&, std::span<const VarRef>)> post;
};

Candidate make_candidate(const BoundCandidate& b, Value n);
std::vector<Candidate> make_candidates(std::span<const BoundCandidate> bs, Value n);

/// The object constraint: how to declare its variables and how to post it.
struct CtrSpec {
    std::string name;
    std::function<VarLayout(Model&)> declare;
    std::function<PostResult(Model&, const VarLayout&)> post;
};

/// Throws Error(InvalidArgument) for n outside the model range.
CtrSpec object_ctr(ObjectKind k, Value n);

struct SelectionStats {
    /// Ctr plus candidate posts; lex posts are not counted.
    std::uint64_t posts = 0;
    std::uint64_t labelings = 0;
    std::uint64_t lex_posts = 0;
    std::uint64_t ctr_posts = 0;
    /// Indexed by candidate slot.
    std::vector<std::uint64_t> slot_posts;
    /// Posts of a slot as the previously selected bound.
    std::vector<std::uint64_t> prev_posts;
    /// One row per top-level select_one: posts of each slot inside that call.
    std::vector<std::vector<std::uint64_t>> top_level_posts;
    /// Largest number of copies of one slot posted at the same time.
    std::uint64_t max_live = 0;
};

struct SelectionReport {
    std::vector<std::string> selected;
    /// Same, as slots into the input candidate list.
    std::vector<std::size_t> selected_slots;
    std::uint64_t posts = 0;
    std::uint64_t labelings = 0;
    std::int64_t wall_ms = 0;
    /// Sorted records with every candidate posted.
    std::vector<SolutionRecord> all_sols;
    SelectionStats stats;
};

/// {"selected":[ids],"posts":..,"labelings":..,"wall_ms":..}
std::string report_json(const SelectionReport& r, int indent = 2);

/// Records in lex order of featvars, then the sentinel. Leaves the model as
/// it found it. labelings, if given, is bumped once per labeling call.
std::vector<SolutionRecord> enumerate_all_solutions(Model& model, std::span<const VarRef> featvars,
                                                    std::span<const VarRef> xs,
                                                    std::uint64_t* labelings = nullptr);

/// Stable sort by nback; equal nback keeps isol order.
void sort_by_nback(std::vector<SolutionRecord>& recs);

/// Split point of a candidate list of length len (len >= 1).
std::size_t split_point(std::size_t len);

/// Incremental selection over one model with Ctr already posted. Candidates
/// are referred to by slot, so duplicates are distinct entries.
class Selector {
public:
    using Sols = std::span<const SolutionRecord>;
    struct Pick {
        std::optional<std::size_t> selected;
        std::vector<std::size_t> rest;
    };

    Selector(Model& model, std::span<const VarRef> featvars, std::span<const VarRef> xs,
             std::span<const Candidate> candidates);

    /// Posts every candidate, enumerates, sorts, retracts. A failing post is
    /// Error(CatalogSoundness).
    std::vector<SolutionRecord> compute_all_solutions();
    std::vector<std::size_t> select(Sols sols, std::vector<std::size_t> bounds, std::optional<std::size_t> prev);
    /// Throws Error(InvalidArgument) on an empty list.
    Pick select_one(bool top, Sols sols, Sols all, const std::vector<std::size_t>& bounds);
    Pick dicho(Sols sols, Sols all, std::size_t len, const std::vector<std::size_t>& prefix,
               const std::vector<std::size_t>& suffix);
    /// Returns the unchecked tail starting at the first record whose nback
    /// differs, or an empty tail. Throws Error(InternalInvariant) when all has
    /// no record isol-1 for a head with isol > 0.
    std::pair<Sols, bool> enumerate(Sols sols, Sols all);

    const SelectionStats& stats() const noexcept { return stats_; }

private:
    void post_slot(std::size_t slot);
    void retract(const TrailMark& m, std::size_t live);

    Model& model_;
    std::vector<VarRef> featvars_;
    std::vector<VarRef> xs_;
    std::span<const Candidate> cands_;
    SelectionStats stats_;
    bool in_top_ = false;
    std::vector<std::size_t> live_;
    std::vector<std::uint64_t> copies_;
};

/// Declares and posts Ctr on model, then runs the selection. The model keeps
/// Ctr and the selected bounds posted. Throws Error(InfeasibleModel) when Ctr
/// fails to post.
SelectionReport selection(Model& model, const CtrSpec& ctr, const VarLayout& layout,
                          std::span<const Candidate> bounds);
SelectionReport selection(const CtrSpec& ctr, std::span<const Candidate> bounds);

/// Same control flow, but each trial builds a fresh model with Ctr, the
/// bounds selected so far and the trial's posted set, and checks the records
/// from the first one.
SelectionReport baseline_selection(const CtrSpec& ctr, std::span<const Candidate> bounds);

/// Fresh model with Ctr and exactly the given candidates posted; returns the
/// records in lex order.
std::vector<SolutionRecord> enumerate_with(const CtrSpec& ctr, std::span<const Candidate> posted);

} // namespace boundforge

#endif
