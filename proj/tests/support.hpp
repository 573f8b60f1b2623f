// Shared fixtures: the burglary corpus used throughout the tests, plus seeded
// random corpus generation for property checks. Random masses are continuous
// and keep some mass on the whole frame per evidence, so generated instances
// never contain fully conflicting subsets or exact quotient ties.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "evpart/evpart.hpp"

namespace evtest {

using namespace evpart;

// Action masks for the street frame: BO=1, BI=2, R=4, B=BO|BI=3, all=7.
inline Frame street_frame() { return Frame({"BO", "BI", "R"}, 2); }

// Appends the unassigned remainder on the whole frame.
inline Evidence make_evidence(const Frame& frame, std::string id, std::vector<WeightedFocal> focals) {
    double sum = 0.0;
    for (const auto& [el, mass] : focals) sum += mass;
    if (1.0 - sum > 1e-12) focals.push_back(WeightedFocal{frame.full(), 1.0 - sum});
    return Evidence(frame, std::move(id), std::move(focals));
}

// Four witness statements about one or two burglaries; the worked example
// exercised by most golden tests.
inline std::vector<Evidence> street_corpus() {
    const Frame f = street_frame();
    return {
        make_evidence(f, "e1", {{{1, 1}, 0.8}}), // BO at E1
        make_evidence(f, "e2", {{{2, 3}, 0.7}}), // BI, either event
        make_evidence(f, "e3", {{{4, 2}, 0.6}}), // R at E2
        make_evidence(f, "e4", {{{3, 3}, 0.5}}), // brown-haired, either event
    };
}

inline DomainDistribution street_distribution() {
    return DomainDistribution({{1, 0.6}, {2, 0.4}});
}

// Relabel subsets in first-appearance order, giving the canonical
// restricted-growth string for comparisons across differently labeled
// partitions.
inline std::vector<std::size_t> canonical_code(const Partition& partition) {
    std::vector<std::size_t> label(partition.subset_count, partition.subset_count);
    std::vector<std::size_t> code;
    code.reserve(partition.assignment.size());
    std::size_t next = 0;
    for (std::size_t s : partition.assignment) {
        if (label[s] == partition.subset_count) label[s] = next++;
        code.push_back(label[s]);
    }
    return code;
}

struct RandomSpec {
    std::size_t min_evidences = 2;
    std::size_t max_evidences = 7;
    std::size_t max_atoms = 4;
    std::size_t max_events = 3;
    std::size_t max_extra_focals = 2; // non-vacuous focals per evidence
};

struct RandomInstance {
    Frame frame;
    std::vector<Evidence> evidences;
    DomainDistribution distribution;
};

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double pick_real(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline RandomInstance random_instance(std::mt19937_64& rng, const RandomSpec& spec = {}) {
    const std::size_t atoms = pick(rng, 2, spec.max_atoms);
    const std::size_t events = pick(rng, 1, spec.max_events);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < atoms; ++i) names.push_back("a" + std::to_string(i + 1));
    Frame frame(names, events);

    const std::size_t n = pick(rng, spec.min_evidences, spec.max_evidences);
    std::vector<Evidence> evidences;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t extra = pick(rng, 0, spec.max_extra_focals);
        std::vector<WeightedFocal> focals;
        std::vector<double> weights;
        for (std::size_t k = 0; k < extra; ++k) {
            FocalElement el{pick(rng, 1, (std::uint64_t{1} << atoms) - 1),
                            pick(rng, 1, (std::uint64_t{1} << events) - 1)};
            if (el == frame.full()) continue;
            bool merged = false;
            const double w = pick_real(rng, 0.1, 1.0);
            for (std::size_t j = 0; j < focals.size(); ++j) {
                if (focals[j].element == el) {
                    weights[j] += w;
                    merged = true;
                    break;
                }
            }
            if (!merged) {
                focals.push_back(WeightedFocal{el, 0.0});
                weights.push_back(w);
            }
        }
        const double theta_weight = pick_real(rng, 0.3, 1.0);
        double total = theta_weight;
        for (double w : weights) total += w;
        double assigned = 0.0;
        for (std::size_t j = 0; j < focals.size(); ++j) {
            focals[j].mass = weights[j] / total;
            assigned += focals[j].mass;
        }
        focals.push_back(WeightedFocal{frame.full(), 1.0 - assigned});
        evidences.emplace_back(frame, "r" + std::to_string(i + 1), std::move(focals));
    }

    const std::size_t support = pick(rng, 1, n);
    std::vector<std::pair<std::size_t, double>> entries;
    std::vector<double> weights;
    double total = 0.0;
    for (std::size_t c = 1; c <= support; ++c) {
        weights.push_back(pick_real(rng, 0.05, 1.0));
        total += weights.back();
    }
    double assigned = 0.0;
    for (std::size_t c = 1; c <= support; ++c) {
        const double mass = c < support ? weights[c - 1] / total : 1.0 - assigned;
        entries.emplace_back(c, mass);
        assigned += mass;
    }
    return RandomInstance{std::move(frame), std::move(evidences), DomainDistribution(entries)};
}

// A random valid partition of n evidences (not necessarily canonical).
inline Partition random_partition(std::mt19937_64& rng, std::size_t n) {
    const std::size_t r = pick(rng, 1, n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    Partition p{r, std::vector<std::size_t>(n, 0)};
    for (std::size_t s = 0; s < r; ++s) p.assignment[order[s]] = s;
    for (std::size_t i = r; i < n; ++i) p.assignment[order[i]] = pick(rng, 0, r - 1);
    return p;
}

} // namespace evtest
