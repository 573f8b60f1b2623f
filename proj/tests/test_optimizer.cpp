#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>

#include "support.hpp"

using namespace evtest;
using Catch::Matchers::WithinAbs;

namespace {

double state_distance(const CombinedState& a, const CombinedState& b) {
    double d = std::abs(a.conflict() - b.conflict());
    for (const auto& [el, mass] : a.focals()) d = std::max(d, std::abs(mass - b.mass_of(el)));
    for (const auto& [el, mass] : b.focals()) d = std::max(d, std::abs(mass - a.mass_of(el)));
    return d;
}

} // namespace

TEST_CASE("partition state bookkeeping") {
    const auto corpus = street_corpus();
    PartitionState state(corpus, Partition{2, {1, 0, 0, 0}});

    REQUIRE(state.subset_count() == 2);
    REQUIRE(state.subset(0).members == std::vector<std::size_t>{1, 2, 3});
    REQUIRE(state.subset(1).members == std::vector<std::size_t>{0});
    REQUIRE(state.subset_of(0) == 1);
    REQUIRE_THAT(state.subset(0).conflict(), WithinAbs(0.51, 1e-9));
    REQUIRE(state.subset(1).conflict() == 0.0);

    state.transfer(3, 1);
    REQUIRE(state.subset(0).members == std::vector<std::size_t>{1, 2});
    REQUIRE(state.subset(1).members == std::vector<std::size_t>{0, 3});
    REQUIRE_THAT(state.subset(0).conflict(), WithinAbs(0.42, 1e-9));
    REQUIRE_THAT(state.subset(1).conflict(), WithinAbs(0.0, 1e-12));
    REQUIRE(state.to_partition() == Partition{2, {1, 0, 0, 1}});

    REQUIRE_THROWS_AS(state.transfer(3, 1), validation_error); // already there
    REQUIRE_THROWS_AS(state.transfer(3, 7), validation_error); // no such subset

    state.transfer(3, 0);
    REQUIRE_THROWS_AS(state.transfer(0, 0), validation_error); // would empty subset 1

    const std::size_t created = state.split_out(3);
    REQUIRE(created == 2);
    REQUIRE(state.subset(2).members == std::vector<std::size_t>{3});
    REQUIRE_THROWS_AS(state.split_out(3), validation_error);   // now alone
}

TEST_CASE("removing one evidence from a subset's fold") {
    const auto corpus = street_corpus();
    PartitionState state(corpus, Partition{1, {0, 0, 0, 0}});

    const CombinedState rest = masses_without(corpus, state.subset(0), 0);
    REQUIRE_THAT(rest.conflict(), WithinAbs(0.51, 1e-9));
    REQUIRE_THAT(rest.mass_of(FocalElement{2, 3}), WithinAbs(0.28, 1e-9));
    REQUIRE_THAT(rest.mass_of(FocalElement{4, 2}), WithinAbs(0.09, 1e-9));
    REQUIRE_THAT(rest.mass_of(FocalElement{3, 3}), WithinAbs(0.06, 1e-9));
    REQUIRE_THAT(rest.mass_of(street_frame().full()), WithinAbs(0.06, 1e-9));

    REQUIRE_THROWS_AS(masses_without(corpus, state.subset(0), 9), validation_error);

    PartitionState split(corpus, Partition{2, {1, 0, 0, 0}});
    const CombinedState unit = masses_without(corpus, split.subset(1), 0);
    REQUIRE(unit.conflict() == 0.0);
    REQUIRE(unit.focals().size() == 1);
    REQUIRE(unit.focals()[0].element == street_frame().full());
}

TEST_CASE("recombining the removed evidence restores the subset fold") {
    std::mt19937_64 rng(6180339);
    for (int round = 0; round < 50; ++round) {
        const RandomInstance inst = random_instance(rng);
        const Partition p = random_partition(rng, inst.evidences.size());
        PartitionState state(inst.evidences, p);
        for (std::size_t s = 0; s < state.subset_count(); ++s) {
            for (std::size_t q : state.subset(s).members) {
                const CombinedState rest = masses_without(inst.evidences, state.subset(s), q);
                const CombinedState back = combine(rest, inst.evidences[q]);
                REQUIRE(state_distance(back, state.subset(s).combined) <= 1e-9);
            }
        }
    }
}

TEST_CASE("transfer quotients when everything is in one subset") {
    const auto corpus = street_corpus();
    PartitionState state(corpus, Partition{1, {0, 0, 0, 0}});

    REQUIRE_THAT(rho(state, 0, 0), WithinAbs(0.60408163265306122, 1e-9));
    REQUIRE_THAT(rho(state, 1, 0), WithinAbs(0.57826086956521738, 1e-9));
    REQUIRE_THAT(rho(state, 2, 0), WithinAbs(0.55909090909090908, 1e-9));
    REQUIRE_THAT(rho(state, 3, 0), WithinAbs(0.08490566037735849, 1e-9));
}

TEST_CASE("transfer quotients after splitting off the first witness") {
    const auto corpus = street_corpus();
    PartitionState state(corpus, Partition{2, {1, 0, 0, 0}});

    const TransferEvaluation e2 = evaluate_transfers(state, 1);
    REQUIRE(e2.home == 0);
    REQUIRE_THAT(e2.rho[0], WithinAbs(0.3, 1e-9));
    REQUIRE_THAT(e2.rho[1], WithinAbs(0.56, 1e-9));
    REQUIRE(e2.best_target == 0);
    REQUIRE(e2.selection_ratio == 1.0); // staying home

    const TransferEvaluation e3 = evaluate_transfers(state, 2);
    REQUIRE_THAT(e3.rho[0], WithinAbs(0.51, 1e-9));
    REQUIRE_THAT(e3.rho[1], WithinAbs(0.48, 1e-9));
    REQUIRE(e3.best_target == 1);
    REQUIRE_THAT(e3.selection_ratio, WithinAbs(52.0 / 49.0, 1e-9));

    const TransferEvaluation e4 = evaluate_transfers(state, 3);
    REQUIRE_THAT(e4.rho[0], WithinAbs(9.0 / 58.0, 1e-9));
    REQUIRE_THAT(e4.rho[1], WithinAbs(0.0, 1e-12));
    REQUIRE(e4.best_target == 1);
    REQUIRE_THAT(e4.selection_ratio, WithinAbs(58.0 / 49.0, 1e-9));

    std::vector<TransferEvaluation> evaluations;
    const auto choice = best_transfer(state, 1e-12, &evaluations);
    REQUIRE(evaluations.size() == 3); // e1 is alone and cannot move
    REQUIRE(choice.has_value());
    REQUIRE(choice->evidence == 3);   // highest ratio wins
    REQUIRE(choice->target == 1);
    REQUIRE_THAT(choice->ratio, WithinAbs(58.0 / 49.0, 1e-9));
}

TEST_CASE("transfer quotients at the answer partition") {
    const auto corpus = street_corpus();
    PartitionState state(corpus, Partition{2, {1, 0, 0, 1}});

    const TransferEvaluation e1 = evaluate_transfers(state, 0);
    REQUIRE_THAT(e1.rho[0], WithinAbs(92.0 / 145.0, 1e-9));
    REQUIRE_THAT(e1.rho[1], WithinAbs(0.0, 1e-12));
    REQUIRE(e1.best_target == 1); // home

    const TransferEvaluation e2 = evaluate_transfers(state, 1);
    REQUIRE_THAT(e2.rho[0], WithinAbs(0.42, 1e-9));
    REQUIRE_THAT(e2.rho[1], WithinAbs(0.56, 1e-9));

    const TransferEvaluation e3 = evaluate_transfers(state, 2);
    REQUIRE_THAT(e3.rho[0], WithinAbs(0.42, 1e-9));
    REQUIRE_THAT(e3.rho[1], WithinAbs(0.54, 1e-9));

    const TransferEvaluation e4 = evaluate_transfers(state, 3);
    REQUIRE_THAT(e4.rho[0], WithinAbs(9.0 / 58.0, 1e-9));
    REQUIRE_THAT(e4.rho[1], WithinAbs(0.0, 1e-12));

    REQUIRE_FALSE(best_transfer(state).has_value()); // nobody wants to move
}

TEST_CASE("quotient guards in degenerate subsets") {
    const Frame f({"a", "b"}, 1);
    const Evidence certain_a(f, "pa", {{{1, 1}, 1.0}});
    const Evidence certain_b(f, "pb", {{{2, 1}, 1.0}});
    const Evidence mild = make_evidence(f, "m", {{{1, 1}, 0.5}});
    const Evidence vacuous(f, "v", {{f.full(), 1.0}});

    SECTION("a target that is pure conflict takes quotient one") {
        const std::vector<Evidence> corpus{certain_a, certain_b, mild};
        PartitionState state(corpus, Partition{2, {0, 0, 1}});
        REQUIRE(state.subset(0).conflict() == 1.0);
        REQUIRE(rho(state, 2, 0) == 1.0);
    }

    SECTION("a home that stays pure conflict after removal takes quotient zero") {
        const std::vector<Evidence> corpus{certain_a, certain_b, mild, vacuous};
        PartitionState state(corpus, Partition{2, {0, 0, 0, 1}});
        REQUIRE(state.subset(0).conflict() == 1.0);
        // removing the mild evidence cannot resurrect the subset, so it has no
        // reason to leave
        REQUIRE(rho(state, 2, 0) == 0.0);
        // removing a certain evidence resurrects it, so that move is
        // favourable with an unbounded ratio
        REQUIRE(rho(state, 0, 0) == 1.0);
        const auto choice = best_transfer(state);
        REQUIRE(choice.has_value());
        REQUIRE(choice->evidence == 0);
        REQUIRE(choice->target == 1);
        REQUIRE(std::isinf(choice->ratio));
    }

    SECTION("vacuous evidence never conflicts anywhere") {
        const std::vector<Evidence> corpus{mild, certain_a, vacuous};
        PartitionState state(corpus, Partition{2, {0, 0, 1}});
        REQUIRE(rho(state, 2, 0) == 0.0);
        REQUIRE(rho(state, 2, 1) == 0.0);
    }
}

TEST_CASE("seeding a partition grows it one split at a time") {
    const auto corpus = street_corpus();
    const DomainDistribution dist = street_distribution();

    SECTION("golden seed for two subsets") {
        std::vector<SeedStep> steps;
        const Partition prev{1, {0, 0, 0, 0}};
        const Partition seeded = initial_partition(prev, 2, corpus, &dist, &steps);
        REQUIRE(seeded == Partition{2, {1, 0, 0, 0}});
        REQUIRE(steps.size() == 1);
        REQUIRE(steps[0].candidates.size() == 4);
        REQUIRE_THAT(steps[0].candidates[0].second, WithinAbs(0.60408163265306122, 1e-9));
        REQUIRE_THAT(steps[0].candidates[1].second, WithinAbs(0.57826086956521738, 1e-9));
        REQUIRE_THAT(steps[0].candidates[2].second, WithinAbs(0.55909090909090908, 1e-9));
        REQUIRE_THAT(steps[0].candidates[3].second, WithinAbs(0.08490566037735849, 1e-9));
        REQUIRE(steps[0].moved == 0);
        REQUIRE(steps[0].new_subset == 1);
        REQUIRE_THAT(steps[0].mcf_after, WithinAbs(0.804, 1e-9));
    }

    SECTION("growing to n subsets yields singletons") {
        const Partition all = initial_partition(std::nullopt, 4, corpus);
        REQUIRE(all.subset_count == 4);
        for (const auto& block : partition_blocks(all)) REQUIRE(block.size() == 1);
    }

    SECTION("bad arguments") {
        REQUIRE_THROWS_AS(initial_partition(std::nullopt, 5, corpus), infeasible_error);
        REQUIRE_THROWS_AS(initial_partition(std::nullopt, 0, corpus), infeasible_error);
        const Partition three{3, {0, 1, 2, 0}};
        REQUIRE_THROWS_AS(initial_partition(three, 2, corpus), validation_error);
        REQUIRE(initial_partition(three, 3, corpus) == three); // already there
    }
}

TEST_CASE("local optimization walks the golden trace") {
    const auto corpus = street_corpus();
    const DomainDistribution dist = street_distribution();

    const LocalOptimum result = local_optimize(corpus, dist, Partition{2, {1, 0, 0, 0}});
    REQUIRE(result.passes.size() == 2);
    REQUIRE_FALSE(result.capped);

    const PassRecord& first = result.passes[0];
    REQUIRE(first.applied.has_value());
    REQUIRE(first.applied->evidence == 3);
    REQUIRE(first.applied->from == 0);
    REQUIRE(first.applied->to == 1);
    REQUIRE_THAT(first.applied->ratio, WithinAbs(58.0 / 49.0, 1e-9));
    REQUIRE_THAT(first.applied->predicted_from_conflict, WithinAbs(0.42, 1e-9));
    REQUIRE_THAT(first.applied->predicted_to_conflict, WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(first.applied->from_conflict, WithinAbs(0.42, 1e-9));
    REQUIRE_THAT(first.applied->to_conflict, WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(first.mcf_after, WithinAbs(0.768, 1e-9));

    const PassRecord& second = result.passes[1];
    REQUIRE_FALSE(second.applied.has_value());
    REQUIRE(second.evaluations.size() == 4);
    REQUIRE_THAT(second.mcf_after, WithinAbs(0.768, 1e-9));

    REQUIRE(result.partition == Partition{2, {1, 0, 0, 1}});
    REQUIRE_THAT(result.mcf, WithinAbs(0.768, 1e-9));
}

TEST_CASE("a single subset has no moves") {
    const auto corpus = street_corpus();
    const DomainDistribution dist = street_distribution();

    const LocalOptimum result = local_optimize(corpus, dist, Partition{1, {0, 0, 0, 0}});
    REQUIRE(result.passes.size() == 1);
    REQUIRE_FALSE(result.passes[0].applied.has_value());
    REQUIRE_THAT(result.mcf, WithinAbs(0.8836, 1e-9));
}

TEST_CASE("the pass cap stops the search and is reported") {
    const auto corpus = street_corpus();
    const DomainDistribution dist = street_distribution();

    OptimizeOptions options;
    options.max_passes = 1;
    const LocalOptimum result = local_optimize(corpus, dist, Partition{2, {1, 0, 0, 0}}, options);
    REQUIRE(result.passes.size() == 1);
    REQUIRE(result.capped);
    REQUIRE(result.passes[0].applied.has_value());
}

TEST_CASE("metaconflict never increases along the passes") {
    std::mt19937_64 rng(314159);
    for (int round = 0; round < 40; ++round) {
        const RandomInstance inst = random_instance(rng);
        const std::size_t n = inst.evidences.size();
        const std::size_t r = pick(rng, 1, n);
        const Partition initial = initial_partition(std::nullopt, r, inst.evidences);
        const LocalOptimum result = local_optimize(inst.evidences, inst.distribution, initial);

        double previous = metaconflict(initial, inst.evidences, inst.distribution);
        for (const PassRecord& pass : result.passes) {
            if (pass.applied) {
                REQUIRE(pass.mcf_after < previous + 1e-12);
            } else {
                REQUIRE_THAT(pass.mcf_after, WithinAbs(previous, 1e-12));
            }
            previous = pass.mcf_after;
        }
        REQUIRE_FALSE(result.capped);
    }
}

TEST_CASE("a favourable quotient means a lower metaconflict and vice versa") {
    std::mt19937_64 rng(662607);
    int checked = 0;
    // Most random corpora are mutually compatible (no conflict anywhere), so a
    // single round rarely yields an informative comparison; run many rounds.
    for (int round = 0; round < 400; ++round) {
        const RandomInstance inst = random_instance(rng);
        const Partition p = random_partition(rng, inst.evidences.size());
        if (p.subset_count < 2) continue;
        PartitionState state(inst.evidences, p);
        const double base = metaconflict(p, inst.evidences, inst.distribution);

        for (std::size_t q = 0; q < inst.evidences.size(); ++q) {
            const std::size_t home = state.subset_of(q);
            if (state.subset(home).members.size() < 2) continue;
            const double rho_home = rho(state, q, home);
            for (std::size_t target = 0; target < state.subset_count(); ++target) {
                if (target == home) continue;
                const double rho_target = rho(state, q, target);

                Partition moved = p;
                moved.assignment[q] = target;
                const double mcf_moved = metaconflict(moved, inst.evidences, inst.distribution);

                if (std::abs(rho_target - rho_home) <= 1e-12 || std::abs(mcf_moved - base) <= 1e-12)
                    continue; // boundary; either direction is acceptable
                REQUIRE((rho_target < rho_home) == (mcf_moved < base));
                ++checked;
            }
        }
    }
    REQUIRE(checked > 100); // the property was actually exercised
}

TEST_CASE("full search reproduces the street answer and its trace") {
    const auto corpus = street_corpus();
    const DomainDistribution dist = street_distribution();

    const SolveResult result = solve(corpus, dist);

    REQUIRE(result.subset_count == 2);
    REQUIRE_THAT(result.mcf, WithinAbs(0.768, 1e-9));
    REQUIRE_THAT(result.plausibility, WithinAbs(0.232, 1e-9));
    REQUIRE(canonical_code(result.partition) == std::vector<std::size_t>{0, 1, 1, 0});

    const SolveTrace& trace = result.trace;
    REQUIRE(trace.domain_conflicts.size() == 4);
    REQUIRE_THAT(trace.domain_conflicts[0], WithinAbs(0.4, 1e-12));
    REQUIRE_THAT(trace.domain_conflicts[1], WithinAbs(0.6, 1e-12));
    REQUIRE_THAT(trace.domain_conflicts[2], WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(trace.domain_conflicts[3], WithinAbs(1.0, 1e-12));

    REQUIRE(trace.visits.size() == 2);

    const CountVisit& first = trace.visits[0];
    REQUIRE(first.subset_count == 1);
    REQUIRE(first.seeding.empty());
    REQUIRE_THAT(first.mcf, WithinAbs(0.8836, 1e-9));
    REQUIRE(first.pruned == std::vector<std::size_t>{3, 4});
    REQUIRE(first.remaining == std::vector<std::size_t>{2});

    const CountVisit& second = trace.visits[1];
    REQUIRE(second.subset_count == 2);
    REQUIRE(second.seeding.size() == 1);
    REQUIRE(second.seeding[0].moved == 0);
    REQUIRE_THAT(second.seeding[0].mcf_after, WithinAbs(0.804, 1e-9));
    REQUIRE_THAT(second.initial_mcf, WithinAbs(0.804, 1e-9));
    REQUIRE(second.passes.size() == 2);
    REQUIRE(second.passes[0].applied.has_value());
    REQUIRE(second.passes[0].applied->evidence == 3);
    REQUIRE_FALSE(second.passes[1].applied.has_value());
    REQUIRE_THAT(second.mcf, WithinAbs(0.768, 1e-9));
    REQUIRE(second.pruned.empty());
    REQUIRE(second.remaining.empty());
    REQUIRE(second.visited == std::vector<std::size_t>{1, 2});
}

TEST_CASE("a prior certain about the count visits it first") {
    const Frame f({"B", "R"}, 2);
    const std::vector<Evidence> corpus{
        make_evidence(f, "w1", {{{1, 1}, 0.8}}),
        make_evidence(f, "w2", {{{2, 3}, 0.4}}),
    };
    const DomainDistribution dist({{2, 1.0}});

    const SolveResult result = solve(corpus, dist);
    REQUIRE(result.trace.visits.size() == 1);
    REQUIRE(result.trace.visits[0].subset_count == 2);
    REQUIRE(result.subset_count == 2);
    REQUIRE_THAT(result.mcf, WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(result.plausibility, WithinAbs(1.0, 1e-12));
    REQUIRE(canonical_code(result.partition) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("equal metaconflicts settle on the smaller count") {
    const Frame f({"a", "b"}, 1);
    const std::vector<Evidence> twins{
        make_evidence(f, "t1", {{{1, 1}, 0.5}}),
        make_evidence(f, "t2", {{{1, 1}, 0.5}}),
    };
    const DomainDistribution dist({{1, 0.5}, {2, 0.5}});

    const SolveResult result = solve(twins, dist);
    REQUIRE(result.trace.visits.size() == 2); // neither count can be pruned
    REQUIRE(result.subset_count == 1);
    REQUIRE_THAT(result.mcf, WithinAbs(0.5, 1e-12));
}

TEST_CASE("search input validation") {
    const auto corpus = street_corpus();
    REQUIRE_THROWS_AS(solve({}, street_distribution()), validation_error);

    const DomainDistribution wide({{5, 1.0}});
    REQUIRE_THROWS_AS(solve(corpus, wide), validation_error); // support beyond the corpus
}

TEST_CASE("two runs produce identical results") {
    std::mt19937_64 rng(271828);
    for (int round = 0; round < 20; ++round) {
        const RandomInstance inst = random_instance(rng);
        const SolveResult a = solve(inst.evidences, inst.distribution);
        const SolveResult b = solve(inst.evidences, inst.distribution);
        REQUIRE(a.partition == b.partition);
        REQUIRE(a.mcf == b.mcf);
        REQUIRE(a.trace.visits.size() == b.trace.visits.size());
        for (std::size_t v = 0; v < a.trace.visits.size(); ++v) {
            REQUIRE(a.trace.visits[v].passes.size() == b.trace.visits[v].passes.size());
            REQUIRE(a.trace.visits[v].mcf == b.trace.visits[v].mcf);
        }
    }
}

TEST_CASE("the search lands on certified local optima near the exhaustive minimum") {
    std::mt19937_64 rng(141421);
    int matches = 0;
    int total = 0;
    for (int round = 0; round < 30; ++round) {
        RandomSpec spec;
        spec.max_evidences = 6;
        const RandomInstance inst = random_instance(rng, spec);
        const SolveResult result = solve(inst.evidences, inst.distribution);
        const OracleResult oracle = brute_force_min_mcf(inst.evidences, inst.distribution);

        REQUIRE(result.mcf >= oracle.mcf - 1e-9); // never better than exhaustive
        PartitionState state(inst.evidences, result.partition);
        REQUIRE_FALSE(best_transfer(state).has_value()); // always a certified local optimum
        ++total;
        if (std::abs(result.mcf - oracle.mcf) <= 1e-9) ++matches;
    }
    REQUIRE(matches >= total * 2 / 3); // the acceptance run enforces the real bar
}
