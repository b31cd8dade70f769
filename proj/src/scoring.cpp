#include "ganalyzer/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ganalyzer/kernels.hpp"
#include "ganalyzer/rng.hpp"

namespace ganalyzer {

SyntheticWorld SyntheticWorld::make(std::uint64_t seed, std::uint32_t dimension, double tau) {
    if (dimension < 2) throw ValidationError("synthetic world requires dimension >= 2");
    if (!(tau > 0.0)) throw ValidationError("temperature must be > 0");

    GaussianStream stream(seed);
    Matrix dirs(dimension, kNumClasses);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        double* col = dirs.col(c);
        for (std::uint32_t i = 0; i < dimension; ++i) col[i] = stream.next();
    }
    SyntheticWorld world = with_directions(dimension, tau, std::move(dirs));
    world.seed_ = seed;
    return world;
}

SyntheticWorld SyntheticWorld::with_directions(std::uint32_t dimension, double tau,
                                               Matrix directions) {
    if (dimension < 2) throw ValidationError("synthetic world requires dimension >= 2");
    if (!(tau > 0.0)) throw ValidationError("temperature must be > 0");
    if (directions.rows() != dimension || directions.cols() != kNumClasses)
        throw ValidationError("direction matrix must be d x 10");

    for (std::size_t c = 0; c < kNumClasses; ++c) {
        double* col = directions.col(c);
        double norm2 = 0.0;
        for (std::uint32_t i = 0; i < dimension; ++i) norm2 += col[i] * col[i];
        const double norm = std::sqrt(norm2);
        if (!(norm > 0.0)) throw ValidationError("class direction must be nonzero");
        for (std::uint32_t i = 0; i < dimension; ++i) col[i] /= norm;
    }

    SyntheticWorld world;
    world.dimension_ = dimension;
    world.tau_ = tau;
    world.directions_ = std::move(directions);
    return world;
}

AttributeProbabilities SyntheticWorld::score(std::span<const double> z) const {
    if (z.size() != dimension_)
        throw ValidationError("vector dimension " + std::to_string(z.size()) +
                              " does not match world dimension " + std::to_string(dimension_));

    std::array<double, kNumClasses> logits{};
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double* w = directions_.col(c);
        double acc = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) acc += w[i] * z[i];
        logits[c] = acc / tau_;
    }

    AttributeProbabilities out;
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        const std::size_t off = kGroupOffsets[g];
        const std::size_t sz = kGroupSizes[g];
        double mx = logits[off];
        for (std::size_t i = 1; i < sz; ++i) mx = std::max(mx, logits[off + i]);
        double denom = 0.0;
        for (std::size_t i = 0; i < sz; ++i) {
            out.p[off + i] = std::exp(logits[off + i] - mx);
            denom += out.p[off + i];
        }
        for (std::size_t i = 0; i < sz; ++i) out.p[off + i] /= denom;
    }
    return out;
}

std::vector<Scorer::Outcome> Scorer::score_store(const LatentStore& store) const {
    std::vector<Outcome> out(store.count());
    for (std::size_t i = 0; i < store.count(); ++i) {
        try {
            out[i].probs = score_one(store.vec(i));
            out[i].ok = true;
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    }
    return out;
}

std::vector<Scorer::Outcome> SyntheticScorer::score_store(const LatentStore& store) const {
    std::vector<Outcome> out(store.count());
    kernels::for_each_index(store.count(), [&](std::size_t i) {
        out[i].probs = world_.score(store.vec(i));
        out[i].ok = true;
    });
    return out;
}

LabelResult label_store(const LatentStore& store, const Scorer& scorer) {
    if (scorer.dimension() != store.dimension)
        throw ValidationError("scorer dimension " + std::to_string(scorer.dimension()) +
                              " does not match store dimension " +
                              std::to_string(store.dimension));

    const auto outcomes = scorer.score_store(store);

    LabelResult result;
    result.table.rows.reserve(store.count());
    for (std::size_t i = 0; i < store.count(); ++i) {
        if (outcomes[i].ok) {
            LabelRow row;
            row.id = store.ids[i];
            row.probs = outcomes[i].probs;
            row.labels = hard_label(row.probs);
            result.table.rows.push_back(row);
        } else {
            result.failures.emplace_back(store.ids[i], outcomes[i].error);
        }
    }
    return result;
}

std::vector<std::uint64_t> select_class(const LabelTable& table, std::string_view class_name) {
    const std::size_t class_id = require_class_id(class_name);
    std::vector<std::uint64_t> ids;
    for (const auto& row : table.rows)
        if (row.labels.has_class(class_id)) ids.push_back(row.id);
    return ids;
}

nlohmann::json probs_to_json(const AttributeProbabilities& probs) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        auto arr = nlohmann::json::array();
        for (std::size_t i = 0; i < kGroupSizes[g]; ++i) arr.push_back(probs.p[kGroupOffsets[g] + i]);
        j[std::string(kGroupNames[g])] = std::move(arr);
    }
    return j;
}

AttributeProbabilities probs_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("probability record must be a JSON object");
    AttributeProbabilities probs;
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        const std::string key(kGroupNames[g]);
        if (!j.contains(key) || !j[key].is_array() || j[key].size() != kGroupSizes[g])
            throw ValidationError("probability group \"" + key + "\" missing or wrong arity");
        double sum = 0.0;
        for (std::size_t i = 0; i < kGroupSizes[g]; ++i) {
            const auto& v = j[key][i];
            if (!v.is_number()) throw ValidationError("probability entries must be numbers");
            const double p = v.get<double>();
            if (!(p >= 0.0 && p <= 1.0))
                throw ValidationError("probability entry outside [0, 1] in group \"" + key + "\"");
            probs.p[kGroupOffsets[g] + i] = p;
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw ValidationError("probability group \"" + key + "\" does not sum to 1");
    }
    return probs;
}

void write_label_table(const std::filesystem::path& path, const LabelTable& table) {
    std::string out;
    for (const auto& row : table.rows) {
        nlohmann::json j;
        j["id"] = row.id;
        j["probs"] = probs_to_json(row.probs);
        nlohmann::json labels = nlohmann::json::object();
        for (std::size_t g = 0; g < kNumGroups; ++g)
            labels[std::string(kGroupNames[g])] = std::string(kClassNames[row.labels.label[g]]);
        j["labels"] = std::move(labels);
        out += j.dump();
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open \"" + path.string() + "\" for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failure on \"" + path.string() + "\"");
}

LabelTable read_label_table(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open \"" + path.string() + "\" for reading");

    LabelTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw IoError("label table line " + std::to_string(lineno) + ": invalid JSON");
        if (!j.contains("id") || !j["id"].is_number_unsigned())
            throw ValidationError("label table line " + std::to_string(lineno) + ": missing id");

        LabelRow row;
        row.id = j["id"].get<std::uint64_t>();
        row.probs = probs_from_json(j.at("probs"));
        row.labels = hard_label(row.probs);
        if (j.contains("labels")) {
            for (std::size_t g = 0; g < kNumGroups; ++g) {
                const std::string key(kGroupNames[g]);
                if (!j["labels"].contains(key)) continue;
                const auto id = class_id_of(j["labels"][key].get<std::string>());
                if (!id || group_of_class(*id) != g)
                    throw ValidationError("label table line " + std::to_string(lineno) +
                                          ": bad label for group \"" + key + "\"");
                row.labels.label[g] = *id;
            }
        }
        if (!table.rows.empty() && row.id <= table.rows.back().id)
            throw ValidationError("label table ids must be strictly increasing");
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace ganalyzer
