// Evidence as a mass function over focal elements of a product frame, plus
// unnormalized combination. Combination keeps the mass assigned to the empty
// set around as `conflict` instead of renormalizing, so the conflict of a
// subset of evidences can be read off the folded state directly.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evpart/errors.hpp"
#include "evpart/frame.hpp"

namespace evpart {

struct WeightedFocal {
    FocalElement element;
    double mass = 0.0;

    friend bool operator==(const WeightedFocal&, const WeightedFocal&) = default;
};

namespace detail {

// Insert mass into a vector kept sorted by element, merging duplicates.
inline void add_mass(std::vector<WeightedFocal>& focals, const FocalElement& el, double mass) {
    auto it = std::lower_bound(focals.begin(), focals.end(), el,
                               [](const WeightedFocal& w, const FocalElement& e) { return w.element < e; });
    if (it != focals.end() && it->element == el)
        it->mass += mass;
    else
        focals.insert(it, WeightedFocal{el, mass});
}

} // namespace detail

class Evidence {
public:
    // Focal elements must be non-empty, within the frame, and unique; masses
    // must lie in (0, 1] and sum to one. Focals are stored in canonical
    // (ascending mask) order regardless of input order.
    Evidence(Frame frame, std::string id, std::vector<WeightedFocal> focals)
        : frame_(std::move(frame)), id_(std::move(id)), focals_(std::move(focals)) {
        if (focals_.empty())
            throw validation_error("evidence '" + id_ + "' has no focal elements");
        std::sort(focals_.begin(), focals_.end(),
                  [](const WeightedFocal& a, const WeightedFocal& b) { return a.element < b.element; });
        double sum = 0.0;
        for (std::size_t i = 0; i < focals_.size(); ++i) {
            const auto& [el, mass] = focals_[i];
            if (el.is_empty())
                throw validation_error("evidence '" + id_ + "' assigns mass to an empty element");
            if (!frame_.contains(el))
                throw validation_error("evidence '" + id_ + "' has a focal element outside the frame");
            if (!(mass > 0.0) || mass > 1.0)
                throw validation_error("evidence '" + id_ + "' has a focal mass outside (0, 1]");
            if (i > 0 && focals_[i - 1].element == el)
                throw validation_error("evidence '" + id_ + "' repeats a focal element");
            sum += mass;
        }
        if (std::abs(sum - 1.0) > kMassTolerance)
            throw validation_error("evidence '" + id_ + "' masses do not sum to one");
    }

    const Frame& frame() const { return frame_; }
    const std::string& id() const { return id_; }
    std::span<const WeightedFocal> focals() const { return focals_; }

    // Total ignorance: the whole frame is the only focal element.
    bool is_vacuous() const {
        return focals_.size() == 1 && focals_.front().element == frame_.full();
    }

    friend bool operator==(const Evidence&, const Evidence&) = default;

private:
    Frame frame_;
    std::string id_;
    std::vector<WeightedFocal> focals_;
};

// Result of folding evidences together without renormalizing: masses over
// non-empty elements plus the mass that fell on the empty set. The invariant
// conflict + sum(masses) == 1 holds up to floating-point error.
class CombinedState {
public:
    // The unit state: everything on the whole frame, no conflict.
    explicit CombinedState(Frame frame) : frame_(std::move(frame)) {
        focals_.push_back(WeightedFocal{frame_.full(), 1.0});
    }

    const Frame& frame() const { return frame_; }
    std::span<const WeightedFocal> focals() const { return focals_; }
    double conflict() const { return conflict_; }

    double mass_of(const FocalElement& el) const {
        auto it = std::lower_bound(focals_.begin(), focals_.end(), el,
                                   [](const WeightedFocal& w, const FocalElement& e) { return w.element < e; });
        if (it != focals_.end() && it->element == el) return it->mass;
        return 0.0;
    }

    friend CombinedState combine(const CombinedState& state, const Evidence& evidence);

private:
    Frame frame_;
    std::vector<WeightedFocal> focals_;
    double conflict_ = 0.0;
};

// One unnormalized combination step. Mass already on the empty set stays
// there; fresh products land on the intersection of their elements.
inline CombinedState combine(const CombinedState& state, const Evidence& evidence) {
    if (state.frame() != evidence.frame())
        throw frame_mismatch_error("cannot combine evidence from a different frame");
    CombinedState out(state.frame());
    out.focals_.clear();
    out.conflict_ = state.conflict();
    for (const auto& [ae, am] : state.focals()) {
        for (const auto& [be, bm] : evidence.focals()) {
            const FocalElement el = intersect(ae, be);
            const double mass = am * bm;
            if (el.is_empty())
                out.conflict_ += mass;
            else
                detail::add_mass(out.focals_, el, mass);
        }
    }
    return out;
}

// Fold a list of evidences into one state, in the given order.
inline CombinedState fold_combine(std::span<const Evidence> evidences) {
    if (evidences.empty())
        throw validation_error("cannot fold an empty list of evidences");
    CombinedState state(evidences.front().frame());
    for (const Evidence& e : evidences) state = combine(state, e);
    return state;
}

// Fold the corpus evidences at the given positions, in ascending position order.
inline CombinedState fold_combine(std::span<const Evidence> corpus, std::span<const std::size_t> members) {
    if (members.empty())
        throw validation_error("cannot fold an empty list of evidences");
    std::vector<std::size_t> order(members.begin(), members.end());
    std::sort(order.begin(), order.end());
    CombinedState state(corpus[order.front()].frame());
    for (std::size_t pos : order) {
        if (pos >= corpus.size())
            throw validation_error("evidence position out of range");
        state = combine(state, corpus[pos]);
    }
    return state;
}

// Conflict of a set of evidences: the mass their combination puts on the
// empty set. A single evidence never conflicts with itself.
inline double subset_conflict(std::span<const Evidence> evidences) {
    return fold_combine(evidences).conflict();
}

inline double subset_conflict(std::span<const Evidence> corpus, std::span<const std::size_t> members) {
    return fold_combine(corpus, members).conflict();
}

namespace detail {

// The event an evidence is specific to: every focal element except the whole
// frame must reference exactly that one event.
inline std::optional<std::size_t> specific_event(const Evidence& evidence) {
    std::optional<std::size_t> event;
    for (const auto& [el, mass] : evidence.focals()) {
        if (el == evidence.frame().full()) continue;
        if ((el.events & (el.events - 1)) != 0) return std::nullopt; // more than one event
        std::size_t idx = 0;
        while ((el.events >> idx) != 1) ++idx;
        if (event && *event != idx) return std::nullopt;
        event = idx;
    }
    return event;
}

} // namespace detail

// Combine evidences that are specific to the same single event into one
// normalized evidence per event, leaving all other evidences untouched.
// Output order follows the first appearance of each group. Throws when the
// evidences for one event are totally contradictory.
inline std::vector<Evidence> precombine_specific(std::span<const Evidence> evidences) {
    if (evidences.empty()) return {};
    const Frame& frame = evidences.front().frame();
    for (const Evidence& e : evidences)
        if (e.frame() != frame)
            throw frame_mismatch_error("cannot precombine evidence from different frames");

    std::vector<std::optional<std::size_t>> events(evidences.size());
    std::vector<std::size_t> group_size(frame.event_count(), 0);
    for (std::size_t i = 0; i < evidences.size(); ++i) {
        events[i] = detail::specific_event(evidences[i]);
        if (events[i]) ++group_size[*events[i]];
    }

    std::vector<Evidence> out;
    std::vector<bool> emitted(frame.event_count(), false);
    for (std::size_t i = 0; i < evidences.size(); ++i) {
        if (!events[i] || group_size[*events[i]] < 2) {
            out.push_back(evidences[i]);
            continue;
        }
        const std::size_t ev = *events[i];
        if (emitted[ev]) continue;
        emitted[ev] = true;

        CombinedState state(frame);
        std::string id;
        for (std::size_t j = 0; j < evidences.size(); ++j) {
            if (events[j] && *events[j] == ev) {
                state = combine(state, evidences[j]);
                if (!id.empty()) id += '+';
                id += evidences[j].id();
            }
        }
        const double scale = 1.0 - state.conflict();
        if (scale <= kMassTolerance)
            throw impossible_evidence_error("evidences specific to the same event are totally contradictory: " + id);
        std::vector<WeightedFocal> focals;
        focals.reserve(state.focals().size());
        for (const auto& [el, mass] : state.focals())
            focals.push_back(WeightedFocal{el, std::min(mass / scale, 1.0)});
        out.emplace_back(frame, std::move(id), std::move(focals));
    }
    return out;
}

} // namespace evpart
