#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganalyzer/class_stats.hpp"
#include "ganalyzer/scoring.hpp"
#include "ganalyzer/taxonomy.hpp"

namespace ganalyzer {

// 10x10 joint-frequency matrix of hard labels: m[a][b] is the fraction of
// samples labeled with both class a and class b; the diagonal is class
// prevalence.
struct CoOccurrenceMatrix {
    std::array<std::array<double, kNumClasses>, kNumClasses> m{};
    std::uint64_t n = 0;
};

using EntanglementDegree = std::array<std::array<double, kNumClasses>, kNumClasses>;

CoOccurrenceMatrix co_occurrence(const LabelTable& labels);

// Entrywise after - before; exact subtraction, no tolerance.
EntanglementDegree entanglement_degree(const CoOccurrenceMatrix& before,
                                       const CoOccurrenceMatrix& after);

// Per-class fractions for one group, summing to 1.
std::vector<double> group_histogram(const LabelTable& labels, std::size_t group);

// Scores the class mean and flags every off-group class whose probability
// exceeds the threshold as an entanglement suspect.
struct MeanProbeResult {
    AttributeProbabilities probs;
    std::vector<std::string> flags;
};

MeanProbeResult mean_probe(const ClassStats& stats, const Scorer& scorer,
                           double threshold = 0.5);

// {"n", "classes", "matrix", "histograms"} report payload.
nlohmann::json co_occurrence_report(const LabelTable& labels);

} // namespace ganalyzer
