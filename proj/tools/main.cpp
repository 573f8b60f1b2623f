// Command-line front end: load a corpus, partition it, report.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "evpart/evpart.hpp"

namespace {

// A fixed subset count skips the search over counts but keeps the same
// seeding and local optimization, reported as a single-visit trace.
evpart::SolveResult solve_fixed(const evpart::CorpusDocument& doc, std::size_t subset_count,
                                const evpart::OptimizeOptions& options) {
    const std::size_t n = doc.evidences.size();
    if (subset_count == 0 || subset_count > n)
        throw evpart::infeasible_error("requested subset count must lie in 1.." + std::to_string(n));

    evpart::SolveResult result;
    for (std::size_t r = 1; r <= n; ++r)
        result.trace.domain_conflicts.push_back(evpart::domain_conflict(doc.distribution, r));

    evpart::CountVisit visit;
    visit.subset_count = subset_count;
    visit.initial = evpart::initial_partition(std::nullopt, subset_count, doc.evidences,
                                              &doc.distribution, &visit.seeding);
    visit.initial_mcf = evpart::metaconflict(visit.initial, doc.evidences, doc.distribution);
    evpart::LocalOptimum local = evpart::local_optimize(doc.evidences, doc.distribution, visit.initial, options);
    visit.passes = std::move(local.passes);
    visit.partition = local.partition;
    visit.mcf = local.mcf;
    visit.capped = local.capped;
    visit.visited = {subset_count};

    result.partition = std::move(local.partition);
    result.subset_count = subset_count;
    result.mcf = visit.mcf;
    result.plausibility = 1.0 - visit.mcf;
    result.trace.visits.push_back(std::move(visit));
    return result;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"evpart: partition conflicting evidence into per-event subsets"};

    std::string input;
    std::string output;
    std::string format = "human";
    bool trace = false;
    bool oracle = false;
    std::optional<std::size_t> fixed_count;
    double tolerance = 1e-12;

    app.add_option("-i,--input", input, "corpus file to load")->required();
    app.add_option("-o,--output", output, "write the report here instead of stdout");
    app.add_option("--format", format, "report format: human or json")
        ->check(CLI::IsMember({"human", "json"}));
    app.add_flag("--trace", trace, "include the full search trace in the report");
    app.add_flag("--oracle", oracle, "also run the exhaustive search and compare (at most 10 evidences)");
    app.add_option("--fixed-r", fixed_count, "partition into exactly this many subsets instead of searching");
    app.add_option("--tolerance", tolerance, "strict-improvement threshold for transfers");

    CLI11_PARSE(app, argc, argv);

    try {
        const evpart::CorpusDocument doc = evpart::load_corpus(input);
        evpart::OptimizeOptions options;
        options.improvement_tolerance = tolerance;

        const evpart::SolveResult result =
            fixed_count ? solve_fixed(doc, *fixed_count, options) : evpart::solve(doc.evidences, doc.distribution, options);
        const evpart::StabilityReport stability =
            evpart::stability_margin(result.partition, doc.evidences, doc.distribution);
        std::optional<evpart::OracleComparison> comparison;
        if (oracle) comparison = evpart::compare_with_oracle(doc, result);

        const std::string report = format == "json"
                                       ? evpart::machine_report(doc, result, stability, comparison, trace)
                                       : evpart::human_report(doc, result, stability, comparison, trace);
        if (output.empty()) {
            std::cout << report;
        } else {
            std::ofstream out(output, std::ios::binary);
            if (!out) {
                std::cerr << "evpart: cannot write to '" << output << "'\n";
                return 2;
            }
            out << report;
        }
        return 0;
    } catch (const evpart::error& e) {
        std::cerr << "evpart: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "evpart: internal error: " << e.what() << "\n";
        return 3;
    }
}
