// Rendering of results. Two formats: a human-readable summary that narrates
// the search the way one would on paper, and a machine-readable JSON report.
// Both print masses with exactly nine decimals; equal inputs produce
// byte-identical output.
#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "evpart/corpus.hpp"
#include "evpart/criterion.hpp"
#include "evpart/optimizer.hpp"
#include "evpart/oracle.hpp"

namespace evpart {

namespace detail {

// Fixed nine-decimal rendering; negative zero is normalized away.
inline std::string format_fixed(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

inline std::string json_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out;
}

// Minimal JSON emitter with insertion-ordered keys and fixed number
// formatting, so reports are reproducible byte for byte.
class JsonWriter {
public:
    explicit JsonWriter(std::ostringstream& out) : out_(out) {}

    void begin_object() { open('{'); }
    void end_object() { close('}'); }
    void begin_array() { open('['); }
    void end_array() { close(']'); }

    void key(std::string_view k) {
        separate();
        out_ << '"' << json_escape(k) << "\": ";
        pending_key_ = true;
    }

    void value_string(std::string_view v) {
        separate();
        out_ << '"' << json_escape(v) << '"';
    }

    void value_number(double v) {
        separate();
        if (std::isnan(v))
            out_ << "\"NaN\"";
        else if (std::isinf(v))
            out_ << (v > 0 ? "\"Infinity\"" : "\"-Infinity\"");
        else
            out_ << format_fixed(v);
    }

    void value_integer(std::size_t v) {
        separate();
        out_ << v;
    }

    void value_bool(bool v) {
        separate();
        out_ << (v ? "true" : "false");
    }

    void value_null() {
        separate();
        out_ << "null";
    }

private:
    void open(char c) {
        separate();
        out_ << c;
        counts_.push_back(0);
    }

    void close(char c) {
        counts_.pop_back();
        out_ << c;
    }

    void separate() {
        if (pending_key_) {
            pending_key_ = false;
            return;
        }
        if (!counts_.empty() && counts_.back()++ > 0) out_ << ", ";
    }

    std::ostringstream& out_;
    std::vector<std::size_t> counts_;
    bool pending_key_ = false;
};

inline std::vector<double> answer_conflicts(const CorpusDocument& doc, const Partition& partition) {
    std::vector<double> out;
    for (const auto& block : partition_blocks(partition))
        out.push_back(subset_conflict(doc.evidences, block));
    return out;
}

} // namespace detail

// How the answer compares against the exhaustive search, and whether it is at
// least a certified local optimum (no favourable transfer exists from it).
struct OracleComparison {
    OracleResult result;
    bool matches = false;
    bool certified_local_optimum = false;
};

inline OracleComparison compare_with_oracle(const CorpusDocument& doc, const SolveResult& result,
                                            double tolerance = 1e-9) {
    OracleComparison cmp;
    cmp.result = brute_force_min_mcf(doc.evidences, doc.distribution);
    cmp.matches = std::abs(result.mcf - cmp.result.mcf) <= tolerance;
    PartitionState state(doc.evidences, result.partition);
    cmp.certified_local_optimum = !best_transfer(state).has_value();
    return cmp;
}

inline std::string human_report(const CorpusDocument& doc, const SolveResult& result,
                                const StabilityReport& stability,
                                const std::optional<OracleComparison>& oracle, bool include_trace) {
    using detail::format_fixed;
    std::ostringstream out;
    const auto& ids = doc.evidences;

    out << "corpus: " << ids.size() << (ids.size() == 1 ? " evidence" : " evidences") << " over "
        << doc.frame.action_count() << (doc.frame.action_count() == 1 ? " action" : " actions") << " and "
        << doc.frame.event_count() << (doc.frame.event_count() == 1 ? " possible event" : " possible events")
        << "\n";
    out << "prior over event counts:";
    for (std::size_t c = 1; c <= doc.distribution.masses().size(); ++c)
        out << "  " << c << ": " << format_fixed(doc.distribution.mass_at(c));
    out << "\n";

    if (include_trace) {
        out << "\ndomain conflict by subset count:\n";
        for (std::size_t r = 1; r <= result.trace.domain_conflicts.size(); ++r)
            out << "  " << r << ": " << format_fixed(result.trace.domain_conflicts[r - 1]) << "\n";

        for (const CountVisit& visit : result.trace.visits) {
            out << "visit " << visit.subset_count
                << (visit.subset_count == 1 ? " subset" : " subsets") << ":\n";
            for (const SeedStep& step : visit.seeding) {
                out << "  seed: quotients";
                for (const auto& [q, r] : step.candidates)
                    out << "  " << ids[q].id() << ": " << format_fixed(r);
                out << "\n  seed: moved " << ids[step.moved].id() << " to new subset "
                    << step.new_subset + 1 << "; metaconflict " << format_fixed(step.mcf_after) << "\n";
            }
            if (visit.seeding.empty())
                out << "  initial metaconflict " << format_fixed(visit.initial_mcf) << "\n";
            for (std::size_t p = 0; p < visit.passes.size(); ++p) {
                const PassRecord& pass = visit.passes[p];
                out << "  pass " << p + 1 << ":\n";
                for (const TransferEvaluation& eval : pass.evaluations) {
                    out << "    " << ids[eval.evidence].id() << ":";
                    for (std::size_t s = 0; s < eval.rho.size(); ++s)
                        out << (s == eval.home ? "  [home] " : "  ") << s + 1 << ": "
                            << format_fixed(eval.rho[s]);
                    out << "  ratio " << format_fixed(eval.selection_ratio) << "\n";
                }
                if (pass.applied) {
                    out << "    moved " << ids[pass.applied->evidence].id() << " from subset "
                        << pass.applied->from + 1 << " to subset " << pass.applied->to + 1 << " (ratio "
                        << format_fixed(pass.applied->ratio) << "); metaconflict "
                        << format_fixed(pass.mcf_after) << "\n";
                } else {
                    out << "    no favourable move\n";
                }
            }
            out << "  local optimum: metaconflict " << format_fixed(visit.mcf);
            if (visit.capped) out << " (pass cap hit)";
            out << "\n";
            if (!visit.pruned.empty()) {
                out << "  pruned counts:";
                for (std::size_t j : visit.pruned) out << " " << j;
                out << "\n";
            }
        }
    }

    out << "\nanswer: " << result.subset_count
        << (result.subset_count == 1 ? " subset" : " subsets") << ", metaconflict "
        << format_fixed(result.mcf) << ", plausibility " << format_fixed(result.plausibility) << "\n";
    const auto conflicts = detail::answer_conflicts(doc, result.partition);
    const auto blocks = partition_blocks(result.partition);
    for (std::size_t s = 0; s < blocks.size(); ++s) {
        out << "  subset " << s + 1 << " (conflict " << format_fixed(conflicts[s]) << "):";
        for (std::size_t q : blocks[s]) out << " " << ids[q].id();
        out << "\n";
    }

    out << "\nstability: " << (stability.stable ? "stable" : "NOT stable") << "\n";
    for (const StabilityEntry& entry : stability.entries)
        out << "  " << ids[entry.evidence].id() << " (subset " << entry.subset + 1 << "): margin "
            << format_fixed(entry.margin) << "\n";
    if (stability.entries.empty())
        out << "  every subset is a singleton; nothing to split\n";

    if (oracle) {
        out << "\noracle: exhaustive minimum " << format_fixed(oracle->result.mcf) << " over "
            << oracle->result.partition.subset_count
            << (oracle->result.partition.subset_count == 1 ? " subset" : " subsets") << " -- "
            << (oracle->matches ? "matches" : "answer is a certified local optimum only") << "\n";
        if (!oracle->matches) {
            const auto oracle_blocks = partition_blocks(oracle->result.partition);
            for (std::size_t s = 0; s < oracle_blocks.size(); ++s) {
                out << "  oracle subset " << s + 1 << ":";
                for (std::size_t q : oracle_blocks[s]) out << " " << ids[q].id();
                out << "\n";
            }
        }
    }
    return out.str();
}

inline std::string machine_report(const CorpusDocument& doc, const SolveResult& result,
                                  const StabilityReport& stability,
                                  const std::optional<OracleComparison>& oracle, bool include_trace) {
    std::ostringstream buffer;
    detail::JsonWriter w(buffer);
    const auto& ids = doc.evidences;

    auto emit_partition = [&](const Partition& partition) {
        w.begin_array();
        for (const auto& block : partition_blocks(partition)) {
            w.begin_array();
            for (std::size_t q : block) w.value_string(ids[q].id());
            w.end_array();
        }
        w.end_array();
    };

    w.begin_object();

    w.key("corpus");
    w.begin_object();
    w.key("actions");
    w.begin_array();
    for (const auto& a : doc.frame.action_atoms()) w.value_string(a);
    w.end_array();
    w.key("events");
    w.begin_array();
    for (const auto& e : doc.event_labels) w.value_string(e);
    w.end_array();
    w.key("distribution");
    w.begin_array();
    for (std::size_t c = 1; c <= doc.distribution.masses().size(); ++c)
        w.value_number(doc.distribution.mass_at(c));
    w.end_array();
    w.key("evidences");
    w.begin_array();
    for (const Evidence& e : doc.evidences) {
        w.begin_object();
        w.key("id");
        w.value_string(e.id());
        w.key("focals");
        w.begin_array();
        for (const auto& [el, mass] : e.focals()) {
            w.begin_object();
            w.key("actions");
            w.begin_array();
            for (std::size_t i = 0; i < doc.frame.action_count(); ++i)
                if (el.actions & (std::uint64_t{1} << i)) w.value_string(doc.frame.action_name(i));
            w.end_array();
            w.key("events");
            w.begin_array();
            for (std::size_t i = 0; i < doc.frame.event_count(); ++i)
                if (el.events & (std::uint64_t{1} << i)) w.value_string(doc.event_labels[i]);
            w.end_array();
            w.key("mass");
            w.value_number(mass);
            w.end_object();
        }
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();

    w.key("answer");
    w.begin_object();
    w.key("subset_count");
    w.value_integer(result.subset_count);
    w.key("metaconflict");
    w.value_number(result.mcf);
    w.key("plausibility");
    w.value_number(result.plausibility);
    w.key("domain_conflict");
    w.value_number(result.trace.domain_conflicts[result.subset_count - 1]);
    w.key("subsets");
    w.begin_array();
    const auto conflicts = detail::answer_conflicts(doc, result.partition);
    const auto blocks = partition_blocks(result.partition);
    for (std::size_t s = 0; s < blocks.size(); ++s) {
        w.begin_object();
        w.key("index");
        w.value_integer(s + 1);
        w.key("conflict");
        w.value_number(conflicts[s]);
        w.key("members");
        w.begin_array();
        for (std::size_t q : blocks[s]) w.value_string(ids[q].id());
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();

    w.key("stability");
    w.begin_object();
    w.key("stable");
    w.value_bool(stability.stable);
    w.key("entries");
    w.begin_array();
    for (const StabilityEntry& entry : stability.entries) {
        w.begin_object();
        w.key("evidence");
        w.value_string(ids[entry.evidence].id());
        w.key("subset");
        w.value_integer(entry.subset + 1);
        w.key("margin");
        w.value_number(entry.margin);
        w.end_object();
    }
    w.end_array();
    w.end_object();

    if (oracle) {
        w.key("oracle");
        w.begin_object();
        w.key("metaconflict");
        w.value_number(oracle->result.mcf);
        w.key("subset_count");
        w.value_integer(oracle->result.partition.subset_count);
        w.key("matches");
        w.value_bool(oracle->matches);
        w.key("certified_local_optimum");
        w.value_bool(oracle->certified_local_optimum);
        w.key("subsets");
        emit_partition(oracle->result.partition);
        w.end_object();
    }

    if (include_trace) {
        w.key("trace");
        w.begin_object();
        w.key("domain_conflicts");
        w.begin_array();
        for (double c : result.trace.domain_conflicts) w.value_number(c);
        w.end_array();
        w.key("visits");
        w.begin_array();
        for (const CountVisit& visit : result.trace.visits) {
            w.begin_object();
            w.key("subset_count");
            w.value_integer(visit.subset_count);
            w.key("seeding");
            w.begin_array();
            for (const SeedStep& step : visit.seeding) {
                w.begin_object();
                w.key("candidates");
                w.begin_array();
                for (const auto& [q, r] : step.candidates) {
                    w.begin_object();
                    w.key("evidence");
                    w.value_string(ids[q].id());
                    w.key("rho");
                    w.value_number(r);
                    w.end_object();
                }
                w.end_array();
                w.key("moved");
                w.value_string(ids[step.moved].id());
                w.key("new_subset");
                w.value_integer(step.new_subset + 1);
                w.key("metaconflict");
                w.value_number(step.mcf_after);
                w.end_object();
            }
            w.end_array();
            w.key("initial_metaconflict");
            w.value_number(visit.initial_mcf);
            w.key("passes");
            w.begin_array();
            for (const PassRecord& pass : visit.passes) {
                w.begin_object();
                w.key("evaluations");
                w.begin_array();
                for (const TransferEvaluation& eval : pass.evaluations) {
                    w.begin_object();
                    w.key("evidence");
                    w.value_string(ids[eval.evidence].id());
                    w.key("home");
                    w.value_integer(eval.home + 1);
                    w.key("rho");
                    w.begin_array();
                    for (double r : eval.rho) w.value_number(r);
                    w.end_array();
                    w.key("best_target");
                    w.value_integer(eval.best_target + 1);
                    w.key("ratio");
                    w.value_number(eval.selection_ratio);
                    w.end_object();
                }
                w.end_array();
                w.key("applied");
                if (pass.applied) {
                    w.begin_object();
                    w.key("evidence");
                    w.value_string(ids[pass.applied->evidence].id());
                    w.key("from");
                    w.value_integer(pass.applied->from + 1);
                    w.key("to");
                    w.value_integer(pass.applied->to + 1);
                    w.key("ratio");
                    w.value_number(pass.applied->ratio);
                    w.key("predicted_from_conflict");
                    w.value_number(pass.applied->predicted_from_conflict);
                    w.key("predicted_to_conflict");
                    w.value_number(pass.applied->predicted_to_conflict);
                    w.key("from_conflict");
                    w.value_number(pass.applied->from_conflict);
                    w.key("to_conflict");
                    w.value_number(pass.applied->to_conflict);
                    w.end_object();
                } else {
                    w.value_null();
                }
                w.key("metaconflict");
                w.value_number(pass.mcf_after);
                w.key("conflicts");
                w.begin_array();
                for (double c : pass.conflicts_after) w.value_number(c);
                w.end_array();
                w.end_object();
            }
            w.end_array();
            w.key("metaconflict");
            w.value_number(visit.mcf);
            w.key("capped");
            w.value_bool(visit.capped);
            w.key("partition");
            emit_partition(visit.partition);
            w.key("pruned");
            w.begin_array();
            for (std::size_t j : visit.pruned) w.value_integer(j);
            w.end_array();
            w.key("remaining");
            w.begin_array();
            for (std::size_t j : visit.remaining) w.value_integer(j);
            w.end_array();
            w.end_object();
        }
        w.end_array();
        w.end_object();
    }

    w.end_object();
    buffer << "\n";
    return buffer.str();
}

} // namespace evpart
