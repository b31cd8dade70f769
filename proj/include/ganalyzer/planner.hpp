#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganalyzer/entanglement.hpp"
#include "ganalyzer/transform.hpp"

namespace ganalyzer {

inline constexpr std::uint64_t kDefaultPlanCount = 2000;

struct PlanEntry {
    std::string name;
    std::string base;
    double beta = 25.0;
    std::uint64_t count = kDefaultPlanCount;
    std::vector<std::pair<std::string, double>> terms; // (class, weight)
};

struct DatasetPlan {
    std::uint64_t seed = 0;
    std::uint32_t dimension = 0;
    std::vector<PlanEntry> entries;

    std::uint64_t total_count() const {
        std::uint64_t total = 0;
        for (const auto& e : entries) total += e.count;
        return total;
    }
};

// Plan JSON:
//   {"seed": 7, "dimension": 512, "entries": [{"name": "...", "base": "angry",
//    "beta": 25, "count": 2000, "terms": [{"class": "angry", "weight": 1.0}]}]}
// Unknown fields, unknown classes and duplicate entry names are rejected.
DatasetPlan load_plan(const std::filesystem::path& path);
DatasetPlan plan_from_json(const nlohmann::json& j);

struct ManifestRow {
    std::uint64_t id = 0;
    std::string entry;
    std::uint64_t draw = 0;
};

struct PlanOutput {
    LatentStore store;
    std::vector<ManifestRow> manifest;
};

// Draws each entry's vectors from an independent seeded stream
// (plan.seed XOR entry index) and applies multi_feature with the entry's
// base/beta/terms. Reruns are bitwise reproducible; ids are assigned
// 0..total-1 ordered by (entry index, draw index).
PlanOutput execute_plan(const DatasetPlan& plan, const StatsRegistry& registry);

// Manifest JSON Lines: {"id": .., "entry": "..", "draw": ..}
void write_plan_manifest(const std::filesystem::path& path,
                         const std::vector<ManifestRow>& manifest);

// Fraction of cross-group off-diagonal cells whose joint frequency is
// below 1%.
double sparsity_score(const CoOccurrenceMatrix& m);

// co_occurrence_report plus the sparsity score.
nlohmann::json balance_report(const LabelTable& labels);

} // namespace ganalyzer
