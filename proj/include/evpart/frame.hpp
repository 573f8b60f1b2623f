// Product frame of discernment: named action atoms crossed with numbered
// events. A focal element is a pair of bitmasks, one per component, and is
// empty as soon as either component is empty — an element can die because the
// actions are incompatible or because the event references are.
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evpart/errors.hpp"

namespace evpart {

inline constexpr std::size_t kMaxActionAtoms = 64;
inline constexpr std::size_t kMaxEvents = 64;

// Tolerance for mass bookkeeping (sums to one, conflict accounting, ...).
inline constexpr double kMassTolerance = 1e-9;

namespace detail {

inline std::uint64_t low_bits(std::size_t count) {
    return count >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << count) - 1;
}

} // namespace detail

struct FocalElement {
    std::uint64_t actions = 0;
    std::uint64_t events = 0;

    bool is_empty() const { return actions == 0 || events == 0; }

    friend auto operator<=>(const FocalElement&, const FocalElement&) = default;
};

// Componentwise intersection on raw masks.
inline FocalElement intersect(const FocalElement& a, const FocalElement& b) {
    return {a.actions & b.actions, a.events & b.events};
}

class Frame {
public:
    Frame(std::vector<std::string> action_atoms, std::size_t event_count)
        : action_atoms_(std::move(action_atoms)), event_count_(event_count) {
        if (action_atoms_.empty() || action_atoms_.size() > kMaxActionAtoms)
            throw validation_error("frame must declare between 1 and 64 action atoms");
        if (event_count_ == 0 || event_count_ > kMaxEvents)
            throw validation_error("frame must declare between 1 and 64 events");
        for (std::size_t i = 0; i < action_atoms_.size(); ++i) {
            if (action_atoms_[i].empty())
                throw validation_error("action atom names must be non-empty");
            for (std::size_t j = i + 1; j < action_atoms_.size(); ++j)
                if (action_atoms_[i] == action_atoms_[j])
                    throw validation_error("duplicate action atom '" + action_atoms_[i] + "'");
        }
    }

    std::size_t action_count() const { return action_atoms_.size(); }
    std::size_t event_count() const { return event_count_; }
    const std::vector<std::string>& action_atoms() const { return action_atoms_; }
    const std::string& action_name(std::size_t i) const { return action_atoms_.at(i); }

    std::optional<std::size_t> action_index(std::string_view name) const {
        for (std::size_t i = 0; i < action_atoms_.size(); ++i)
            if (action_atoms_[i] == name) return i;
        return std::nullopt;
    }

    std::uint64_t all_actions() const { return detail::low_bits(action_atoms_.size()); }
    std::uint64_t all_events() const { return detail::low_bits(event_count_); }

    // The whole frame; the element of total ignorance.
    FocalElement full() const { return {all_actions(), all_events()}; }

    bool contains(const FocalElement& el) const {
        return (el.actions & ~all_actions()) == 0 && (el.events & ~all_events()) == 0;
    }

    friend bool operator==(const Frame&, const Frame&) = default;

private:
    std::vector<std::string> action_atoms_;
    std::size_t event_count_;
};

// Frame-checked intersection: both operands must belong to the frame.
inline FocalElement intersect(const Frame& frame, const FocalElement& a, const FocalElement& b) {
    if (!frame.contains(a) || !frame.contains(b))
        throw frame_mismatch_error("focal element does not belong to the frame");
    return intersect(a, b);
}

} // namespace evpart
