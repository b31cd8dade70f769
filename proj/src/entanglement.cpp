#include "ganalyzer/entanglement.hpp"

#include <cmath>

namespace ganalyzer {

CoOccurrenceMatrix co_occurrence(const LabelTable& labels) {
    if (labels.rows.empty()) throw ValidationError("co_occurrence: empty label table");

    std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};
    for (const auto& row : labels.rows) {
        for (std::size_t ga = 0; ga < kNumGroups; ++ga) {
            const std::size_t a = row.labels.label[ga];
            for (std::size_t gb = 0; gb < kNumGroups; ++gb) {
                const std::size_t b = row.labels.label[gb];
                ++counts[a][b];
            }
        }
    }

    CoOccurrenceMatrix out;
    out.n = labels.rows.size();
    for (std::size_t a = 0; a < kNumClasses; ++a)
        for (std::size_t b = 0; b < kNumClasses; ++b)
            out.m[a][b] = static_cast<double>(counts[a][b]) / static_cast<double>(out.n);
    return out;
}

EntanglementDegree entanglement_degree(const CoOccurrenceMatrix& before,
                                       const CoOccurrenceMatrix& after) {
    EntanglementDegree d{};
    for (std::size_t a = 0; a < kNumClasses; ++a)
        for (std::size_t b = 0; b < kNumClasses; ++b) d[a][b] = after.m[a][b] - before.m[a][b];
    return d;
}

std::vector<double> group_histogram(const LabelTable& labels, std::size_t group) {
    if (group >= kNumGroups) throw ValidationError("group index out of range");
    if (labels.rows.empty()) throw ValidationError("group_histogram: empty label table");

    std::vector<std::uint64_t> counts(kGroupSizes[group], 0);
    for (const auto& row : labels.rows)
        ++counts[row.labels.label[group] - kGroupOffsets[group]];

    std::vector<double> fractions(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        fractions[i] = static_cast<double>(counts[i]) / static_cast<double>(labels.rows.size());
    return fractions;
}

MeanProbeResult mean_probe(const ClassStats& stats, const Scorer& scorer, double threshold) {
    if (stats.d() != scorer.dimension())
        throw ValidationError("mean_probe: stats dimension does not match scorer dimension");
    const auto own_class = class_id_of(stats.class_id);
    if (!own_class)
        throw ValidationError("mean_probe: stats class \"" + stats.class_id +
                              "\" is not in the taxonomy");
    const std::size_t own_group = group_of_class(*own_class);

    MeanProbeResult out;
    out.probs = scorer.score_one(stats.mean);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (group_of_class(c) == own_group) continue;
        if (out.probs.p[c] > threshold) out.flags.emplace_back(kClassNames[c]);
    }
    return out;
}

nlohmann::json co_occurrence_report(const LabelTable& labels) {
    const CoOccurrenceMatrix cooc = co_occurrence(labels);

    nlohmann::json j;
    j["n"] = cooc.n;
    auto classes = nlohmann::json::array();
    for (const auto& name : kClassNames) classes.push_back(std::string(name));
    j["classes"] = std::move(classes);

    auto matrix = nlohmann::json::array();
    for (std::size_t a = 0; a < kNumClasses; ++a) {
        auto row = nlohmann::json::array();
        for (std::size_t b = 0; b < kNumClasses; ++b) row.push_back(cooc.m[a][b]);
        matrix.push_back(std::move(row));
    }
    j["matrix"] = std::move(matrix);

    nlohmann::json hist = nlohmann::json::object();
    for (std::size_t g = 0; g < kNumGroups; ++g)
        hist[std::string(kGroupNames[g])] = group_histogram(labels, g);
    j["histograms"] = std::move(hist);
    return j;
}

} // namespace ganalyzer
