#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ganalyzer/class_stats.hpp"
#include "ganalyzer/latent_store.hpp"

namespace ganalyzer {

enum class EditMode {
    edit,
    feature,
    psi,
    multi_edit,
    multi_feature,
    disentangled_edit,
};

std::string to_string(EditMode mode);
EditMode edit_mode_from_string(const std::string& s);

// Declarative description of one transformation run.
struct EditSpec {
    EditMode mode = EditMode::edit;
    std::string base;
    std::optional<double> alpha;                         // edit / psi / disentangled
    std::optional<double> beta;                          // feature / psi / multi-feature
    std::vector<std::pair<std::string, double>> terms;   // (class, weight)
    std::vector<std::pair<std::string, double>> undesired; // (class, delta)

    // Strict parse: unknown fields are rejected, per-mode constraints checked.
    static EditSpec from_json(const nlohmann::json& j);
    void validate() const;
};

using StatsRegistry = std::map<std::string, ClassStats>;

// --- Single-vector transformation functions -------------------------------

// alpha * m + V b~
std::vector<double> edit(std::span<const double> z, const ClassStats& stats, double alpha);

// m + V~ b~ (leading ceil(beta/100 * t) eigenvectors)
std::vector<double> feature_synth(std::span<const double> z, const ClassStats& stats,
                                  double beta);

// (feature_synth, edit) as one call.
std::pair<std::vector<double>, std::vector<double>> psi(std::span<const double> z,
                                                        const ClassStats& stats, double alpha,
                                                        double beta);

struct WeightedStats {
    const ClassStats* stats = nullptr;
    double weight = 0.0;
};

// sum_i gamma_i m_i + V_base b~ (b~ taken against the base class)
std::vector<double> multi_edit(std::span<const double> z, const ClassStats& base,
                               std::vector<WeightedStats> terms);

// sum_i w_i m_i + V~_base b~
std::vector<double> multi_feature(std::span<const double> z, const ClassStats& base, double beta,
                                  std::vector<WeightedStats> terms);

struct UndesiredMean {
    std::vector<double> mean;
    double delta = 0.0;
    std::string class_id; // used only for canonical summation order
};

// alpha * m_desired - sum_j delta_j m_undesired_j + V_desired b~
std::vector<double> disentangled_edit(std::span<const double> z, const ClassStats& desired,
                                      double alpha, std::vector<UndesiredMean> undesired);

// --- Batch application over a store ----------------------------------------

struct TransformOutput {
    LatentStore primary;                // edited / synthesized vectors
    std::optional<LatentStore> feature; // z_fb store, psi mode only
};

// Applies the spec to every record; ids preserved, records processed in
// parallel with id-ordered assembly.
TransformOutput apply_spec(const LatentStore& store, const EditSpec& spec,
                           const StatsRegistry& registry);

} // namespace ganalyzer
