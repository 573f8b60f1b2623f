// The quantity the partitioner minimizes: the conflict that appears when a
// candidate partition of the evidences is itself treated as a piece of
// evidence. It has two sources — conflict inside each subset, and conflict
// between the chosen number of subsets and the prior over how many events
// there are — and those fold together exactly like ordinary conflicts do.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "evpart/errors.hpp"
#include "evpart/evidence.hpp"

namespace evpart {

// Prior over the number of actual events, m(E_count). Stored densely from
// count 1 up to the largest declared count.
class DomainDistribution {
public:
    explicit DomainDistribution(const std::vector<std::pair<std::size_t, double>>& entries) {
        if (entries.empty())
            throw validation_error("domain distribution has no entries");
        double sum = 0.0;
        for (const auto& [count, mass] : entries) {
            if (count == 0)
                throw validation_error("domain distribution counts start at one");
            if (mass < 0.0 || mass > 1.0)
                throw validation_error("domain distribution masses must lie in [0, 1]");
            if (count > masses_.size()) masses_.resize(count, 0.0);
            if (declared_.size() < masses_.size()) declared_.resize(masses_.size(), false);
            if (declared_[count - 1])
                throw validation_error("domain distribution repeats a count");
            declared_[count - 1] = true;
            masses_[count - 1] = mass;
            sum += mass;
        }
        if (std::abs(sum - 1.0) > kMassTolerance)
            throw validation_error("domain distribution masses do not sum to one");
    }

    // Mass on exactly `count` events; zero beyond the declared range.
    double mass_at(std::size_t count) const {
        if (count == 0 || count > masses_.size()) return 0.0;
        return masses_[count - 1];
    }

    // Largest count that carries positive mass.
    std::size_t max_support() const {
        for (std::size_t i = masses_.size(); i > 0; --i)
            if (masses_[i - 1] > 0.0) return i;
        return 0;
    }

    // Dense masses; index i holds the mass on i+1 events.
    const std::vector<double>& masses() const { return masses_; }

    friend bool operator==(const DomainDistribution& a, const DomainDistribution& b) {
        return a.masses_ == b.masses_;
    }

private:
    std::vector<double> masses_;
    std::vector<bool> declared_;
};

// A partition of corpus positions 0..n-1 into `subset_count` non-empty
// subsets, as an assignment of each position to a 0-based subset index.
struct Partition {
    std::size_t subset_count = 0;
    std::vector<std::size_t> assignment;

    friend bool operator==(const Partition&, const Partition&) = default;
};

inline void validate_partition(const Partition& partition, std::size_t evidence_count) {
    if (partition.assignment.size() != evidence_count)
        throw validation_error("partition assignment length does not match the corpus");
    if (partition.subset_count == 0 || partition.subset_count > evidence_count)
        throw validation_error("partition subset count must lie in 1..n");
    std::vector<bool> used(partition.subset_count, false);
    for (std::size_t s : partition.assignment) {
        if (s >= partition.subset_count)
            throw validation_error("partition assigns an evidence to a subset out of range");
        used[s] = true;
    }
    for (bool u : used)
        if (!u) throw validation_error("partition has an empty subset");
}

// Member positions of each subset, ascending within a subset.
inline std::vector<std::vector<std::size_t>> partition_blocks(const Partition& partition) {
    std::vector<std::vector<std::size_t>> blocks(partition.subset_count);
    for (std::size_t i = 0; i < partition.assignment.size(); ++i)
        blocks[partition.assignment[i]].push_back(i);
    return blocks;
}

// Conflict between proposing `subset_count` events and the prior: the prior
// mass on every other count.
inline double domain_conflict(const DomainDistribution& dist, std::size_t subset_count) {
    if (subset_count == 0)
        throw validation_error("subset count must be at least one");
    double other = 0.0;
    for (std::size_t c = 1; c <= dist.masses().size(); ++c)
        if (c != subset_count) other += dist.mass_at(c);
    return std::min(other, 1.0);
}

namespace detail {

inline double metaconflict_from_parts(double c0, std::span<const double> subset_conflicts) {
    double survives = 1.0 - c0;
    for (double c : subset_conflicts) survives *= 1.0 - c;
    return 1.0 - survives;
}

} // namespace detail

// One minus the product of the survival probabilities of all conflict
// sources: the domain prior plus each subset's internal conflict.
inline double metaconflict(const Partition& partition, std::span<const Evidence> evidences,
                           const DomainDistribution& dist) {
    validate_partition(partition, evidences.size());
    std::vector<double> conflicts;
    conflicts.reserve(partition.subset_count);
    for (const auto& block : partition_blocks(partition))
        conflicts.push_back(subset_conflict(evidences, block));
    return detail::metaconflict_from_parts(domain_conflict(dist, partition.subset_count), conflicts);
}

// The evidence about a partition says only "this partition is not it" with
// the metaconflict as its weight, so belief in the partition is zero and all
// support for it lives in the plausibility.
inline double plausibility(const Partition& partition, std::span<const Evidence> evidences,
                           const DomainDistribution& dist) {
    return 1.0 - metaconflict(partition, evidences, dist);
}

// Sound pruning test: the domain conflict alone already exceeds the best
// metaconflict achieved, so no partition into `candidate_count` subsets can
// do better.
inline bool domain_bound_excludes(const DomainDistribution& dist, std::size_t candidate_count,
                                  double best_mcf) {
    return domain_conflict(dist, candidate_count) > best_mcf;
}

struct StabilityEntry {
    std::size_t evidence = 0;     // corpus position
    std::size_t subset = 0;       // its subset in the partition
    double margin = 0.0;          // metaconflict increase when split off alone
};

struct StabilityReport {
    std::vector<StabilityEntry> entries;
    bool stable = true;           // all margins strictly positive
};

// How firmly each evidence sits in its subset: the metaconflict increase if
// it were split off into a subset of its own. Evidences already alone in a
// subset have nowhere to split to and are skipped.
inline StabilityReport stability_margin(const Partition& partition, std::span<const Evidence> evidences,
                                        const DomainDistribution& dist) {
    validate_partition(partition, evidences.size());
    const double base = metaconflict(partition, evidences, dist);
    const auto blocks = partition_blocks(partition);

    StabilityReport report;
    for (std::size_t i = 0; i < partition.assignment.size(); ++i) {
        const std::size_t home = partition.assignment[i];
        if (blocks[home].size() < 2) continue;
        Partition split = partition;
        split.subset_count = partition.subset_count + 1;
        split.assignment[i] = partition.subset_count;
        const double margin = metaconflict(split, evidences, dist) - base;
        report.entries.push_back(StabilityEntry{i, home, margin});
        if (!(margin > 0.0)) report.stable = false;
    }
    return report;
}

} // namespace evpart
