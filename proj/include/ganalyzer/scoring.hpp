#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ganalyzer/latent_store.hpp"
#include "ganalyzer/linalg.hpp"
#include "ganalyzer/taxonomy.hpp"

namespace ganalyzer {

// Deterministic desk-scale stand-in for the image classifiers: ten unit
// direction vectors, one per class, scored as a per-group softmax of
// (w_c . z) / tau.
class SyntheticWorld {
public:
    // Directions drawn from a seeded standard-normal stream, then normalized.
    static SyntheticWorld make(std::uint64_t seed, std::uint32_t dimension, double tau);

    // Explicitly supplied directions (normalized here); used by tests and by
    // worlds with planted cross-class correlation.
    static SyntheticWorld with_directions(std::uint32_t dimension, double tau, Matrix directions);

    AttributeProbabilities score(std::span<const double> z) const;

    std::uint32_t dimension() const { return dimension_; }
    double tau() const { return tau_; }
    std::uint64_t seed() const { return seed_; }
    const Matrix& directions() const { return directions_; }
    std::span<const double> direction(std::size_t class_id) const {
        return {directions_.col(class_id), dimension_};
    }

private:
    SyntheticWorld() = default;

    std::uint32_t dimension_ = 0;
    double tau_ = 1.0;
    std::uint64_t seed_ = 0;
    Matrix directions_; // d x 10, column c = w_c, unit norm
};

struct LabelRow {
    std::uint64_t id = 0;
    AttributeProbabilities probs;
    HardLabelSet labels;
};

// Rows sorted by id.
struct LabelTable {
    std::vector<LabelRow> rows;

    std::size_t size() const { return rows.size(); }
};

// Scorer abstraction shared by the synthetic world and the remote client.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::uint32_t dimension() const = 0;

    // Scores one vector; throws on failure.
    virtual AttributeProbabilities score_one(std::span<const double> z) const = 0;

    // Scores a whole store. outcome[i] holds either probabilities or an error
    // message for record i. The base implementation loops score_one.
    struct Outcome {
        bool ok = false;
        AttributeProbabilities probs;
        std::string error;
    };
    virtual std::vector<Outcome> score_store(const LatentStore& store) const;
};

class SyntheticScorer : public Scorer {
public:
    explicit SyntheticScorer(SyntheticWorld world) : world_(std::move(world)) {}

    std::uint32_t dimension() const override { return world_.dimension(); }
    AttributeProbabilities score_one(std::span<const double> z) const override {
        return world_.score(z);
    }
    std::vector<Outcome> score_store(const LatentStore& store) const override;

    const SyntheticWorld& world() const { return world_; }

private:
    SyntheticWorld world_;
};

struct LabelResult {
    LabelTable table;
    std::vector<std::pair<std::uint64_t, std::string>> failures; // (id, message), by id
};

// One row per successfully scored record, ordered by id; failures collected
// per row rather than aborting the run.
LabelResult label_store(const LatentStore& store, const Scorer& scorer);

// Ids whose hard label for the class's group equals class_name.
std::vector<std::uint64_t> select_class(const LabelTable& table, std::string_view class_name);

// JSON Lines interchange, one object per record, ordered by id:
//   {"id": .., "probs": {"gender": [..], ...}, "labels": {"gender": "woman", ...}}
void write_label_table(const std::filesystem::path& path, const LabelTable& table);
LabelTable read_label_table(const std::filesystem::path& path);

nlohmann::json probs_to_json(const AttributeProbabilities& probs);
AttributeProbabilities probs_from_json(const nlohmann::json& j);

} // namespace ganalyzer
