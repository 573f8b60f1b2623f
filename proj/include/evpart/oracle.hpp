// Exhaustive reference implementations, deliberately structured differently
// from the fast paths: conflict by direct enumeration of focal selections,
// and the minimal metaconflict by enumerating every partition. Used to
// cross-check the incremental machinery; hard size caps keep them honest.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "evpart/criterion.hpp"
#include "evpart/errors.hpp"
#include "evpart/evidence.hpp"

namespace evpart {

// Enumerates the partitions of n items into exactly r non-empty subsets as
// restricted-growth strings (code[0] == 0, each value at most one above the
// running maximum, exactly r distinct values), in lexicographic order.
class PartitionEnumerator {
public:
    PartitionEnumerator(std::size_t n, std::size_t r) : n_(n), r_(r) {
        if (n_ == 0)
            throw validation_error("cannot enumerate partitions of zero items");
        if (r_ == 0 || r_ > n_)
            throw infeasible_error("subset count must lie in 1..n");
    }

    // Fills `code` with the next partition; returns false when exhausted.
    bool next(std::vector<std::size_t>& code) {
        if (done_) return false;
        if (fresh_) {
            fresh_ = false;
            code.assign(n_, 0);
            for (std::size_t k = 1; k < r_; ++k) code[n_ - r_ + k] = k;
            return true;
        }
        for (std::size_t i = n_ - 1; i > 0; --i) {
            std::size_t prefix_max = 0;
            for (std::size_t j = 0; j < i; ++j) prefix_max = std::max(prefix_max, code[j]);
            const std::size_t v = code[i] + 1;
            if (v > prefix_max + 1 || v > r_ - 1) continue;
            const std::size_t running_max = std::max(prefix_max, v);
            const std::size_t need = (r_ - 1) - running_max;
            if (need > n_ - 1 - i) continue;
            code[i] = v;
            for (std::size_t j = i + 1; j < n_; ++j) code[j] = 0;
            for (std::size_t t = 0; t < need; ++t) code[n_ - need + t] = running_max + 1 + t;
            return true;
        }
        done_ = true;
        return false;
    }

    // Number of partitions of n items into exactly r subsets.
    static unsigned long long count(std::size_t n, std::size_t r) {
        if (r == 0 || r > n) return 0;
        std::vector<unsigned long long> row(r + 1, 0);
        row[0] = 1; // S(0, 0)
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t k = std::min(i, r); k > 0; --k)
                row[k] = row[k] * k + row[k - 1];
            row[0] = 0;
        }
        return row[r];
    }

private:
    std::size_t n_;
    std::size_t r_;
    bool fresh_ = true;
    bool done_ = false;
};

// Conflict computed the slow way: walk every way of picking one focal
// element per evidence and add up the mass of the selections whose common
// intersection is empty. Refuses selection spaces above 10^7.
inline double conflict_by_enumeration(std::span<const Evidence> evidences) {
    if (evidences.empty())
        throw validation_error("cannot enumerate conflict of an empty list of evidences");
    const Frame& frame = evidences.front().frame();
    unsigned long long selections = 1;
    for (const Evidence& e : evidences) {
        if (e.frame() != frame)
            throw frame_mismatch_error("cannot enumerate conflict across different frames");
        selections *= e.focals().size();
        if (selections > 10'000'000ULL)
            throw oracle_too_large_error("conflict enumeration exceeds 10^7 focal selections");
    }

    std::vector<std::size_t> pick(evidences.size(), 0);
    double conflict = 0.0;
    while (true) {
        FocalElement common = frame.full();
        double mass = 1.0;
        for (std::size_t i = 0; i < evidences.size(); ++i) {
            const auto& [el, m] = evidences[i].focals()[pick[i]];
            common = intersect(common, el);
            mass *= m;
        }
        if (common.is_empty()) conflict += mass;

        std::size_t i = 0;
        while (i < pick.size()) {
            if (++pick[i] < evidences[i].focals().size()) break;
            pick[i] = 0;
            ++i;
        }
        if (i == pick.size()) break;
    }
    return conflict;
}

struct OracleResult {
    Partition partition;
    double mcf = 0.0;
};

// Minimal metaconflict by sheer enumeration over every partition into every
// admissible subset count (or one fixed count). Exact ties go to the
// lexicographically smallest restricted-growth string. Capped at 10
// evidences.
inline OracleResult brute_force_min_mcf(std::span<const Evidence> corpus, const DomainDistribution& dist,
                                        std::optional<std::size_t> fixed_count = std::nullopt) {
    if (corpus.empty())
        throw validation_error("cannot search partitions of an empty corpus");
    if (corpus.size() > 10)
        throw oracle_too_large_error("exhaustive partition search is capped at 10 evidences");
    const std::size_t n = corpus.size();
    if (fixed_count && (*fixed_count == 0 || *fixed_count > n))
        throw infeasible_error("subset count must lie in 1..n");

    bool found = false;
    OracleResult best;
    std::vector<std::size_t> code;
    const std::size_t lo = fixed_count ? *fixed_count : 1;
    const std::size_t hi = fixed_count ? *fixed_count : n;
    for (std::size_t r = lo; r <= hi; ++r) {
        PartitionEnumerator en(n, r);
        while (en.next(code)) {
            Partition p{r, code};
            const double mcf = metaconflict(p, corpus, dist);
            if (!found || mcf < best.mcf || (mcf == best.mcf && code < best.partition.assignment)) {
                found = true;
                best.partition = std::move(p);
                best.mcf = mcf;
            }
        }
    }
    return best;
}

} // namespace evpart
