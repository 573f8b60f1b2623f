// Iterative minimization of the metaconflict. The search never refolds more
// than it must: for each candidate move of one evidence it computes the
// fraction of a subset's non-conflicting mass the evidence would turn into
// conflict (the transfer quotient rho), picks the most favourable move per
// pass, and walks candidate subset counts in order of their domain conflict,
// pruning counts whose domain conflict alone already exceeds the best
// metaconflict found.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "evpart/criterion.hpp"
#include "evpart/errors.hpp"
#include "evpart/evidence.hpp"

namespace evpart {

// One subset of the working partition: member positions (ascending) plus the
// fold of their evidences.
struct SubsetState {
    std::vector<std::size_t> members;
    CombinedState combined;

    double conflict() const { return combined.conflict(); }
};

// A partition with every subset's fold kept current. Transfers refold the two
// affected subsets from scratch, in ascending member order, so equal
// partitions always carry bit-identical state.
class PartitionState {
public:
    PartitionState(std::span<const Evidence> corpus, const Partition& partition)
        : corpus_(corpus), assignment_(partition.assignment) {
        validate_partition(partition, corpus.size());
        for (const auto& block : partition_blocks(partition))
            subsets_.push_back(SubsetState{block, fold_combine(corpus, block)});
    }

    std::span<const Evidence> corpus() const { return corpus_; }
    std::size_t evidence_count() const { return corpus_.size(); }
    std::size_t subset_count() const { return subsets_.size(); }
    const SubsetState& subset(std::size_t i) const { return subsets_.at(i); }
    std::size_t subset_of(std::size_t evidence) const { return assignment_.at(evidence); }

    Partition to_partition() const { return Partition{subsets_.size(), assignment_}; }

    std::vector<double> conflicts() const {
        std::vector<double> out;
        out.reserve(subsets_.size());
        for (const auto& s : subsets_) out.push_back(s.conflict());
        return out;
    }

    // Move one evidence to another subset. The source must keep at least one
    // member.
    void transfer(std::size_t evidence, std::size_t to) {
        const std::size_t from = assignment_.at(evidence);
        if (to >= subsets_.size())
            throw validation_error("transfer target subset out of range");
        if (to == from)
            throw validation_error("transfer target equals the current subset");
        if (subsets_[from].members.size() < 2)
            throw validation_error("transfer would empty a subset");
        remove_member(from, evidence);
        insert_member(to, evidence);
        assignment_[evidence] = to;
        refold(from);
        refold(to);
    }

    // Move one evidence into a brand-new singleton subset; returns its index.
    std::size_t split_out(std::size_t evidence) {
        const std::size_t from = assignment_.at(evidence);
        if (subsets_[from].members.size() < 2)
            throw validation_error("cannot split the only member out of a subset");
        remove_member(from, evidence);
        refold(from);
        const std::size_t idx = subsets_.size();
        subsets_.push_back(SubsetState{{evidence}, fold_combine(corpus_, std::vector<std::size_t>{evidence})});
        assignment_[evidence] = idx;
        return idx;
    }

private:
    void remove_member(std::size_t subset, std::size_t evidence) {
        auto& m = subsets_[subset].members;
        m.erase(std::find(m.begin(), m.end(), evidence));
    }

    void insert_member(std::size_t subset, std::size_t evidence) {
        auto& m = subsets_[subset].members;
        m.insert(std::lower_bound(m.begin(), m.end(), evidence), evidence);
    }

    void refold(std::size_t subset) {
        subsets_[subset].combined = fold_combine(corpus_, subsets_[subset].members);
    }

    std::span<const Evidence> corpus_;
    std::vector<std::size_t> assignment_;
    std::vector<SubsetState> subsets_;
};

namespace detail {

// Mass that would fall on the empty set when the evidence joins the state:
// the sum over pairs with an empty intersection of the product of masses.
inline double conflicting_mass(const CombinedState& state, const Evidence& evidence) {
    double sum = 0.0;
    for (const auto& [ae, am] : state.focals())
        for (const auto& [be, bm] : evidence.focals())
            if (intersect(ae, be).is_empty()) sum += am * bm;
    return sum;
}

} // namespace detail

// The subset's fold with one member left out (the unit state for a
// singleton), rebuilt from the corpus in ascending member order.
inline CombinedState masses_without(std::span<const Evidence> corpus, const SubsetState& subset,
                                    std::size_t evidence) {
    if (std::find(subset.members.begin(), subset.members.end(), evidence) == subset.members.end())
        throw validation_error("evidence is not a member of the subset");
    std::vector<std::size_t> rest;
    rest.reserve(subset.members.size() - 1);
    for (std::size_t m : subset.members)
        if (m != evidence) rest.push_back(m);
    if (rest.empty()) return CombinedState(corpus[evidence].frame());
    return fold_combine(corpus, rest);
}

// Transfer quotient: the fraction of the target subset's non-conflicting
// mass the evidence would turn into conflict if it joined — or, for the
// evidence's own subset, the fraction of the after-removal non-conflicting
// mass the evidence currently destroys. Lower is better for a target; an
// evidence should move only to a subset whose quotient beats its home one.
// Degenerate guards: a target that is already pure conflict takes rho 1 (the
// move cannot help); a home subset that stays pure conflict even without the
// evidence takes rho 0 (leaving cannot help).
inline double rho(const PartitionState& state, std::size_t evidence, std::size_t target) {
    const std::size_t home = state.subset_of(evidence);
    const Evidence& e = state.corpus()[evidence];
    if (target == home) {
        const SubsetState& s = state.subset(home);
        const CombinedState rest = masses_without(state.corpus(), s, evidence);
        const double delta = detail::conflicting_mass(rest, e);
        const double denom = 1.0 - s.conflict() + delta; // one minus the conflict after removal
        if (denom <= 0.0) return 0.0;
        return std::clamp(delta / denom, 0.0, 1.0);
    }
    const SubsetState& s = state.subset(target);
    const double denom = 1.0 - s.conflict();
    if (denom <= 0.0) return 1.0;
    return std::clamp(detail::conflicting_mass(s.combined, e) / denom, 0.0, 1.0);
}

// All quotients for one evidence, the best target (lowest quotient, ties to
// the lowest subset index), and the selection ratio used to rank favourable
// moves against each other. The ratio is 1 when the best target is home.
struct TransferEvaluation {
    std::size_t evidence = 0;
    std::size_t home = 0;
    std::vector<double> rho;
    std::size_t best_target = 0;
    double selection_ratio = 1.0;
};

inline TransferEvaluation evaluate_transfers(const PartitionState& state, std::size_t evidence) {
    TransferEvaluation eval;
    eval.evidence = evidence;
    eval.home = state.subset_of(evidence);
    eval.rho.reserve(state.subset_count());
    for (std::size_t s = 0; s < state.subset_count(); ++s)
        eval.rho.push_back(rho(state, evidence, s));
    eval.best_target = 0;
    for (std::size_t s = 1; s < state.subset_count(); ++s)
        if (eval.rho[s] < eval.rho[eval.best_target]) eval.best_target = s;
    if (eval.best_target == eval.home) {
        eval.selection_ratio = 1.0;
    } else {
        const double num = 1.0 - eval.rho[eval.best_target];
        const double den = 1.0 - eval.rho[eval.home];
        if (den <= 0.0)
            eval.selection_ratio = num <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
        else
            eval.selection_ratio = num / den;
    }
    return eval;
}

struct TransferChoice {
    std::size_t evidence = 0;
    std::size_t target = 0;
    double ratio = 1.0;
};

// The single most favourable move of the pass: among evidences whose best
// target strictly beats home (beyond the tolerance), the one with the highest
// selection ratio. Ties keep the lowest evidence position. Evidences alone in
// their subset cannot move and are not evaluated.
inline std::optional<TransferChoice> best_transfer(const PartitionState& state,
                                                   double improvement_tolerance = 1e-12,
                                                   std::vector<TransferEvaluation>* evaluations = nullptr) {
    std::optional<TransferChoice> best;
    for (std::size_t q = 0; q < state.evidence_count(); ++q) {
        if (state.subset(state.subset_of(q)).members.size() < 2) continue;
        TransferEvaluation eval = evaluate_transfers(state, q);
        const bool favourable = eval.best_target != eval.home &&
                                eval.rho[eval.best_target] < eval.rho[eval.home] - improvement_tolerance;
        if (favourable && (!best || eval.selection_ratio > best->ratio))
            best = TransferChoice{q, eval.best_target, eval.selection_ratio};
        if (evaluations) evaluations->push_back(std::move(eval));
    }
    return best;
}

// One step of building a seed partition: every movable evidence's home
// quotient, and which evidence was split off into the new subset.
struct SeedStep {
    std::vector<std::pair<std::size_t, double>> candidates; // (evidence, home rho)
    std::size_t moved = 0;
    std::size_t new_subset = 0;
    double mcf_after = std::numeric_limits<double>::quiet_NaN();
};

// Grow a partition to the requested subset count by repeatedly splitting off
// the evidence that is most conflicting at home (highest home quotient, ties
// to the lowest position). Starts from the previous answer when given, else
// from everything in one subset. Supplying a distribution fills the
// metaconflict after each step into the trace.
inline Partition initial_partition(const std::optional<Partition>& previous, std::size_t subset_count,
                                   std::span<const Evidence> corpus,
                                   const DomainDistribution* dist = nullptr,
                                   std::vector<SeedStep>* trace = nullptr) {
    if (corpus.empty())
        throw validation_error("cannot partition an empty corpus");
    if (subset_count == 0 || subset_count > corpus.size())
        throw infeasible_error("subset count must lie in 1..n");

    Partition base;
    if (previous) {
        validate_partition(*previous, corpus.size());
        if (previous->subset_count > subset_count)
            throw validation_error("previous partition already has more subsets than requested");
        base = *previous;
    } else {
        base = Partition{1, std::vector<std::size_t>(corpus.size(), 0)};
    }

    PartitionState state(corpus, base);
    while (state.subset_count() < subset_count) {
        SeedStep step;
        bool found = false;
        double best_rho = 0.0;
        for (std::size_t q = 0; q < corpus.size(); ++q) {
            if (state.subset(state.subset_of(q)).members.size() < 2) continue;
            const double r = rho(state, q, state.subset_of(q));
            step.candidates.emplace_back(q, r);
            if (!found || r > best_rho) {
                found = true;
                best_rho = r;
                step.moved = q;
            }
        }
        step.new_subset = state.split_out(step.moved);
        if (dist) step.mcf_after = metaconflict(state.to_partition(), corpus, *dist);
        if (trace) trace->push_back(std::move(step));
    }
    return state.to_partition();
}

// A move that was applied: where the evidence went, the closed-form conflict
// predictions for both subsets, and the refolded values actually installed.
struct AppliedTransfer {
    std::size_t evidence = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    double ratio = 1.0;
    double predicted_from_conflict = 0.0;
    double predicted_to_conflict = 0.0;
    double from_conflict = 0.0;
    double to_conflict = 0.0;
};

// One pass over all movable evidences: every evaluation, the move applied (if
// any), and the metaconflict and subset conflicts after the pass.
struct PassRecord {
    std::vector<TransferEvaluation> evaluations;
    std::optional<AppliedTransfer> applied;
    double mcf_after = 0.0;
    std::vector<double> conflicts_after;
};

struct LocalOptimum {
    Partition partition;
    double mcf = 0.0;
    std::vector<PassRecord> passes;
    bool capped = false;
};

struct OptimizeOptions {
    // A move must beat the home quotient by more than this to count.
    double improvement_tolerance = 1e-12;
    // Hard cap on passes; 0 means 10 * n^2.
    std::size_t max_passes = 0;
};

// Apply the single best transfer per pass until no favourable move remains
// (the final, moveless pass is recorded too) or the pass cap is hit.
inline LocalOptimum local_optimize(std::span<const Evidence> corpus, const DomainDistribution& dist,
                                   const Partition& initial, const OptimizeOptions& options = {}) {
    PartitionState state(corpus, initial);
    const double c0 = domain_conflict(dist, initial.subset_count);
    const std::size_t cap = options.max_passes != 0
                                ? options.max_passes
                                : 10 * corpus.size() * corpus.size();

    LocalOptimum out;
    bool converged = false;
    for (std::size_t pass = 0; pass < cap && !converged; ++pass) {
        PassRecord record;
        const auto choice = best_transfer(state, options.improvement_tolerance, &record.evaluations);
        if (choice) {
            AppliedTransfer applied;
            applied.evidence = choice->evidence;
            applied.from = state.subset_of(choice->evidence);
            applied.to = choice->target;
            applied.ratio = choice->ratio;
            const SubsetState& from = state.subset(applied.from);
            const SubsetState& to = state.subset(applied.to);
            const Evidence& e = corpus[choice->evidence];
            const CombinedState rest = masses_without(corpus, from, choice->evidence);
            applied.predicted_from_conflict = from.conflict() - detail::conflicting_mass(rest, e);
            applied.predicted_to_conflict = to.conflict() + detail::conflicting_mass(to.combined, e);
            state.transfer(choice->evidence, choice->target);
            applied.from_conflict = state.subset(applied.from).conflict();
            applied.to_conflict = state.subset(applied.to).conflict();
            record.applied = applied;
        } else {
            converged = true;
        }
        const auto conflicts = state.conflicts();
        record.mcf_after = detail::metaconflict_from_parts(c0, conflicts);
        record.conflicts_after = conflicts;
        out.passes.push_back(std::move(record));
    }
    out.capped = !converged;
    out.partition = state.to_partition();
    out.mcf = out.passes.back().mcf_after;
    return out;
}

// One visited subset count: how its seed partition was grown, the passes the
// local search took, the optimum reached, and the bookkeeping of candidate
// counts pruned and remaining after the visit.
struct CountVisit {
    std::size_t subset_count = 0;
    std::vector<SeedStep> seeding;
    Partition initial;
    double initial_mcf = 0.0;
    std::vector<PassRecord> passes;
    Partition partition;
    double mcf = 0.0;
    bool capped = false;
    std::vector<std::size_t> pruned;
    std::vector<std::size_t> remaining;
    std::vector<std::size_t> visited;
};

struct SolveTrace {
    std::vector<double> domain_conflicts; // index i: domain conflict of i+1 subsets
    std::vector<CountVisit> visits;
};

struct SolveResult {
    Partition partition;
    std::size_t subset_count = 0;
    double mcf = 0.0;
    double plausibility = 0.0;
    SolveTrace trace;
};

// Full search over the number of subsets. Candidate counts are visited in
// order of increasing domain conflict (ties to the smaller count); each visit
// seeds from the previous optimum, runs the local search, and then prunes
// every remaining count whose domain conflict alone exceeds the best
// metaconflict achieved so far. Visiting a count also retires all smaller
// counts: growing the count further can only be re-evaluated, never undone.
// The answer is the best visited optimum, ties to the smaller count.
inline SolveResult solve(std::span<const Evidence> corpus, const DomainDistribution& dist,
                         const OptimizeOptions& options = {}) {
    if (corpus.empty())
        throw validation_error("cannot partition an empty corpus");
    if (dist.max_support() > corpus.size())
        throw validation_error("domain distribution puts mass on more events than there are evidences");

    const std::size_t n = corpus.size();
    SolveTrace trace;
    trace.domain_conflicts.reserve(n);
    for (std::size_t r = 1; r <= n; ++r) trace.domain_conflicts.push_back(domain_conflict(dist, r));

    std::vector<std::size_t> candidates;
    for (std::size_t r = 1; r <= n; ++r) candidates.push_back(r);
    std::vector<std::size_t> visited;
    std::optional<Partition> previous;
    std::size_t best_index = 0;
    double best_mcf = 0.0;
    bool have_best = false;

    while (!candidates.empty()) {
        std::size_t pick = 0;
        for (std::size_t i = 1; i < candidates.size(); ++i)
            if (trace.domain_conflicts[candidates[i] - 1] < trace.domain_conflicts[candidates[pick] - 1])
                pick = i;
        const std::size_t r = candidates[pick];
        visited.push_back(r);
        std::erase_if(candidates, [r](std::size_t j) { return j <= r; });

        CountVisit visit;
        visit.subset_count = r;
        visit.initial = initial_partition(previous, r, corpus, &dist, &visit.seeding);
        visit.initial_mcf = metaconflict(visit.initial, corpus, dist);
        LocalOptimum local = local_optimize(corpus, dist, visit.initial, options);
        visit.passes = std::move(local.passes);
        visit.partition = std::move(local.partition);
        visit.mcf = local.mcf;
        visit.capped = local.capped;
        previous = visit.partition;

        if (!have_best || visit.mcf < best_mcf) {
            have_best = true;
            best_mcf = visit.mcf;
            best_index = trace.visits.size();
        }
        std::erase_if(candidates, [&](std::size_t j) {
            if (domain_bound_excludes(dist, j, best_mcf)) {
                visit.pruned.push_back(j);
                return true;
            }
            return false;
        });
        visit.remaining = candidates;
        visit.visited = visited;
        trace.visits.push_back(std::move(visit));
    }

    const CountVisit& best = trace.visits[best_index];
    SolveResult result;
    result.partition = best.partition;
    result.subset_count = best.subset_count;
    result.mcf = best.mcf;
    result.plausibility = 1.0 - best.mcf;
    result.trace = std::move(trace);
    return result;
}

} // namespace evpart
