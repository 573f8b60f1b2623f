// Line-oriented corpus files: a frame section, a prior over the number of
// events, and one section per evidence. '#' starts a comment, '*' means the
// whole component, and any mass an evidence leaves unassigned goes to the
// whole frame. Parse errors cite file and line.
//
//   [frame]
//   actions = BO BI R
//   events = E1 E2
//
//   [distribution]
//   1 = 0.6
//   2 = 0.4
//
//   [evidence e1]
//   BO @ E1 = 0.8
#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evpart/criterion.hpp"
#include "evpart/errors.hpp"
#include "evpart/evidence.hpp"
#include "evpart/frame.hpp"

namespace evpart {

struct CorpusDocument {
    Frame frame;
    std::vector<std::string> event_labels; // one per frame event
    DomainDistribution distribution;
    std::vector<Evidence> evidences;

    friend bool operator==(const CorpusDocument&, const CorpusDocument&) = default;
};

namespace detail {

[[noreturn]] inline void corpus_fail(std::string_view origin, std::size_t line, const std::string& message) {
    std::ostringstream out;
    out << origin << ":" << line << ": " << message;
    throw corpus_error(out.str());
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline bool valid_name_token(std::string_view token) {
    if (token.empty()) return false;
    for (char c : token)
        if (c == '[' || c == ']' || c == '=' || c == '@' || c == '#' || c == '*') return false;
    return true;
}

inline double parse_mass(std::string_view origin, std::size_t line, std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        corpus_fail(origin, line, "cannot parse mass '" + std::string(text) + "'");
    return value;
}

inline std::uint64_t parse_component(std::string_view origin, std::size_t line, std::string_view text,
                                     const std::vector<std::string>& names, std::uint64_t all,
                                     std::string_view what) {
    const auto tokens = split_tokens(text);
    if (tokens.empty())
        corpus_fail(origin, line, std::string("missing ") + std::string(what) + " tokens");
    if (tokens.size() == 1 && tokens[0] == "*") return all;
    std::uint64_t mask = 0;
    for (const auto& token : tokens) {
        if (token == "*")
            corpus_fail(origin, line, "'*' cannot be mixed with named " + std::string(what) + "s");
        std::size_t index = names.size();
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == token) { index = i; break; }
        if (index == names.size())
            corpus_fail(origin, line, "unknown " + std::string(what) + " '" + std::string(token) + "'");
        const std::uint64_t bit = std::uint64_t{1} << index;
        if (mask & bit)
            corpus_fail(origin, line, std::string(what) + " '" + std::string(token) + "' repeated");
        mask |= bit;
    }
    return mask;
}

inline std::string format_exact(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

} // namespace detail

inline CorpusDocument parse_corpus(std::string_view text, std::string_view origin = "<input>") {
    using detail::corpus_fail;

    enum class Section { none, frame, distribution, evidence };
    Section section = Section::none;

    std::optional<Frame> frame;
    std::vector<std::string> atom_names;
    std::vector<std::string> event_labels;
    bool frame_closed = false;
    std::size_t frame_line = 0;

    std::vector<std::pair<std::size_t, double>> dist_entries;
    bool dist_seen = false;
    std::size_t dist_line = 0;

    struct PendingEvidence {
        std::string id;
        std::size_t line = 0;
        std::vector<WeightedFocal> focals;
        std::vector<std::size_t> focal_lines;
        double sum = 0.0;
    };
    std::vector<PendingEvidence> pending;

    auto close_frame = [&]() {
        if (section != Section::frame || frame) return;
        if (atom_names.empty())
            corpus_fail(origin, frame_line, "[frame] section declares no actions");
        if (event_labels.empty())
            corpus_fail(origin, frame_line, "[frame] section declares no events");
        try {
            frame.emplace(atom_names, event_labels.size());
        } catch (const validation_error& e) {
            corpus_fail(origin, frame_line, e.what());
        }
        frame_closed = true;
    };

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const std::size_t hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string_view line = detail::trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                corpus_fail(origin, line_no, "unterminated section header");
            close_frame();
            const std::string_view inner = detail::trim(line.substr(1, line.size() - 2));
            if (inner == "frame") {
                if (frame_closed)
                    corpus_fail(origin, line_no, "duplicate [frame] section");
                section = Section::frame;
                frame_line = line_no;
            } else if (inner == "distribution") {
                if (!frame_closed)
                    corpus_fail(origin, line_no, "the [frame] section must come first");
                if (dist_seen)
                    corpus_fail(origin, line_no, "duplicate [distribution] section");
                dist_seen = true;
                dist_line = line_no;
                section = Section::distribution;
            } else if (inner.substr(0, 8) == "evidence" &&
                       (inner.size() == 8 || inner[8] == ' ' || inner[8] == '\t')) {
                if (!frame_closed)
                    corpus_fail(origin, line_no, "the [frame] section must come first");
                const std::string_view id = detail::trim(inner.substr(8));
                if (!detail::valid_name_token(id) || id.find(' ') != std::string_view::npos ||
                    id.find('\t') != std::string_view::npos)
                    corpus_fail(origin, line_no, "evidence sections need an identifier: [evidence <id>]");
                for (const auto& p : pending)
                    if (p.id == id)
                        corpus_fail(origin, line_no, "duplicate evidence id '" + std::string(id) + "'");
                pending.push_back(PendingEvidence{std::string(id), line_no, {}, {}, 0.0});
                section = Section::evidence;
            } else {
                corpus_fail(origin, line_no, "unknown section '" + std::string(inner) + "'");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            corpus_fail(origin, line_no, "expected '=' in '" + std::string(line) + "'");
        const std::string_view lhs = detail::trim(line.substr(0, eq));
        const std::string_view rhs = detail::trim(line.substr(eq + 1));

        switch (section) {
        case Section::none:
            corpus_fail(origin, line_no, "content before the first section header");
        case Section::frame: {
            const auto tokens = detail::split_tokens(rhs);
            if (lhs == "actions") {
                if (!atom_names.empty())
                    corpus_fail(origin, line_no, "duplicate 'actions' line");
                for (const auto& t : tokens) {
                    if (!detail::valid_name_token(t))
                        corpus_fail(origin, line_no, "invalid action atom name '" + std::string(t) + "'");
                    atom_names.emplace_back(t);
                }
            } else if (lhs == "events") {
                if (!event_labels.empty())
                    corpus_fail(origin, line_no, "duplicate 'events' line");
                for (const auto& t : tokens) {
                    if (!detail::valid_name_token(t))
                        corpus_fail(origin, line_no, "invalid event label '" + std::string(t) + "'");
                    for (const auto& seen : event_labels)
                        if (seen == t)
                            corpus_fail(origin, line_no, "duplicate event label '" + std::string(t) + "'");
                    event_labels.emplace_back(t);
                }
                if (event_labels.size() > kMaxEvents)
                    corpus_fail(origin, line_no, "at most 64 events are supported");
            } else {
                corpus_fail(origin, line_no, "[frame] lines are 'actions = ...' or 'events = ...'");
            }
            break;
        }
        case Section::distribution: {
            std::size_t count = 0;
            const std::string_view key = lhs;
            const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), count);
            if (ec != std::errc{} || ptr != key.data() + key.size() || count == 0)
                corpus_fail(origin, line_no, "distribution keys are positive event counts, got '" + std::string(key) + "'");
            for (const auto& [c, m] : dist_entries)
                if (c == count)
                    corpus_fail(origin, line_no, "duplicate distribution entry for count " + std::to_string(count));
            const double mass = detail::parse_mass(origin, line_no, rhs);
            if (mass < 0.0 || mass > 1.0)
                corpus_fail(origin, line_no, "distribution masses must lie in [0, 1]");
            dist_entries.emplace_back(count, mass);
            break;
        }
        case Section::evidence: {
            const std::size_t at = lhs.find('@');
            if (at == std::string_view::npos)
                corpus_fail(origin, line_no, "evidence lines are '<actions> @ <events> = <mass>'");
            FocalElement el;
            el.actions = detail::parse_component(origin, line_no, lhs.substr(0, at), frame->action_atoms(),
                                                 frame->all_actions(), "action atom");
            el.events = detail::parse_component(origin, line_no, detail::trim(lhs.substr(at + 1)), event_labels,
                                                frame->all_events(), "event");
            const double mass = detail::parse_mass(origin, line_no, rhs);
            if (!(mass > 0.0) || mass > 1.0)
                corpus_fail(origin, line_no, "focal masses must lie in (0, 1]");
            auto& ev = pending.back();
            for (const auto& f : ev.focals)
                if (f.element == el)
                    corpus_fail(origin, line_no, "duplicate focal element in evidence '" + ev.id + "'");
            ev.focals.push_back(WeightedFocal{el, mass});
            ev.focal_lines.push_back(line_no);
            ev.sum += mass;
            break;
        }
        }
    }
    close_frame();

    if (!frame)
        corpus_fail(origin, line_no, "missing [frame] section");
    if (!dist_seen)
        corpus_fail(origin, line_no, "missing [distribution] section");
    if (pending.empty())
        corpus_fail(origin, line_no, "no [evidence ...] sections");

    std::vector<Evidence> evidences;
    evidences.reserve(pending.size());
    for (auto& p : pending) {
        if (p.focals.empty())
            corpus_fail(origin, p.line, "evidence '" + p.id + "' has no focal lines");
        if (p.sum > 1.0 + kMassTolerance)
            corpus_fail(origin, p.line, "evidence '" + p.id + "' masses sum above one");
        const double deficit = 1.0 - p.sum;
        if (deficit > kMassTolerance)
            detail::add_mass(p.focals, frame->full(), deficit);
        try {
            evidences.emplace_back(*frame, p.id, std::move(p.focals));
        } catch (const validation_error& e) {
            corpus_fail(origin, p.line, e.what());
        }
    }

    std::optional<DomainDistribution> dist;
    try {
        dist.emplace(dist_entries);
    } catch (const validation_error& e) {
        corpus_fail(origin, dist_line, e.what());
    }
    if (dist->max_support() > evidences.size())
        corpus_fail(origin, dist_line, "distribution puts mass on more events than there are evidences");

    return CorpusDocument{std::move(*frame), std::move(event_labels), std::move(*dist), std::move(evidences)};
}

inline CorpusDocument load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw corpus_error("cannot open corpus file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_corpus(buffer.str(), path.string());
}

namespace detail {

inline void render_component(std::ostringstream& out, std::uint64_t mask, std::uint64_t all,
                             const std::vector<std::string>& names) {
    if (mask == all) {
        out << '*';
        return;
    }
    bool first = true;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (mask & (std::uint64_t{1} << i)) {
            if (!first) out << ' ';
            out << names[i];
            first = false;
        }
    }
}

} // namespace detail

// Canonical text form: masses are written with enough digits to reparse to
// the identical doubles, so save followed by parse is the identity.
inline std::string save_corpus(const CorpusDocument& doc) {
    std::ostringstream out;
    out << "[frame]\nactions =";
    for (const auto& a : doc.frame.action_atoms()) out << ' ' << a;
    out << "\nevents =";
    for (const auto& e : doc.event_labels) out << ' ' << e;
    out << "\n\n[distribution]\n";
    for (std::size_t c = 1; c <= doc.distribution.masses().size(); ++c)
        out << c << " = " << detail::format_exact(doc.distribution.mass_at(c)) << '\n';
    for (const Evidence& e : doc.evidences) {
        out << "\n[evidence " << e.id() << "]\n";
        for (const auto& [el, mass] : e.focals()) {
            std::ostringstream line;
            detail::render_component(line, el.actions, doc.frame.all_actions(), doc.frame.action_atoms());
            line << " @ ";
            detail::render_component(line, el.events, doc.frame.all_events(), doc.event_labels);
            out << line.str() << " = " << detail::format_exact(mass) << '\n';
        }
    }
    return out.str();
}

} // namespace evpart
