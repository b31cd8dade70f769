#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ganalyzer/error.hpp"

namespace ganalyzer {

// The fixed 10-class attribute taxonomy: four groups of sizes 2, 2, 3, 3.
// Class ids are global indices 0..9 in declaration order.

inline constexpr std::size_t kNumGroups = 4;
inline constexpr std::size_t kNumClasses = 10;

inline constexpr std::array<std::string_view, kNumGroups> kGroupNames = {
    "gender", "age", "emotion", "race"};

inline constexpr std::array<std::size_t, kNumGroups> kGroupSizes = {2, 2, 3, 3};
inline constexpr std::array<std::size_t, kNumGroups> kGroupOffsets = {0, 2, 4, 7};

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "woman", "man",                // gender
    "young", "old",                // age
    "happy", "neutral", "angry",   // emotion
    "black", "white", "others"};   // race

inline std::size_t group_of_class(std::size_t class_id) {
    for (std::size_t g = kNumGroups; g-- > 0;)
        if (class_id >= kGroupOffsets[g]) return g;
    return 0;
}

inline std::optional<std::size_t> class_id_of(std::string_view name) {
    for (std::size_t i = 0; i < kNumClasses; ++i)
        if (kClassNames[i] == name) return i;
    return std::nullopt;
}

inline std::size_t require_class_id(std::string_view name) {
    if (auto id = class_id_of(name)) return *id;
    throw ValidationError("unknown class \"" + std::string(name) + "\"");
}

inline std::optional<std::size_t> group_id_of(std::string_view name) {
    for (std::size_t g = 0; g < kNumGroups; ++g)
        if (kGroupNames[g] == name) return g;
    return std::nullopt;
}

// Per-group probability vectors, concatenated length 10 in class-id order.
struct AttributeProbabilities {
    std::array<double, kNumClasses> p{};

    double group_sum(std::size_t g) const {
        double s = 0.0;
        for (std::size_t i = 0; i < kGroupSizes[g]; ++i) s += p[kGroupOffsets[g] + i];
        return s;
    }

    bool operator==(const AttributeProbabilities&) const = default;
};

// One class per group; values are global class ids.
struct HardLabelSet {
    std::array<std::size_t, kNumGroups> label{};

    bool has_class(std::size_t class_id) const {
        return label[group_of_class(class_id)] == class_id;
    }

    bool operator==(const HardLabelSet&) const = default;
};

// Per-group argmax; ties break toward the lowest index.
inline HardLabelSet hard_label(const AttributeProbabilities& probs) {
    HardLabelSet out;
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        std::size_t best = kGroupOffsets[g];
        for (std::size_t i = 1; i < kGroupSizes[g]; ++i) {
            const std::size_t c = kGroupOffsets[g] + i;
            if (probs.p[c] > probs.p[best]) best = c;
        }
        out.label[g] = best;
    }
    return out;
}

} // namespace ganalyzer
