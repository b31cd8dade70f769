#include "ganalyzer/planner.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>

#include "ganalyzer/kernels.hpp"
#include "ganalyzer/rng.hpp"

namespace ganalyzer {

DatasetPlan load_plan(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open \"" + path.string() + "\" for reading");
    nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
    if (j.is_discarded()) throw ValidationError("plan file is not valid JSON");
    return plan_from_json(j);
}

DatasetPlan plan_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("plan must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "seed" && it.key() != "dimension" && it.key() != "entries")
            throw ValidationError("plan: unknown field \"" + it.key() + "\"");

    DatasetPlan plan;
    if (!j.contains("seed") || !j["seed"].is_number_unsigned())
        throw ValidationError("plan: missing unsigned \"seed\"");
    plan.seed = j["seed"].get<std::uint64_t>();
    if (!j.contains("dimension") || !j["dimension"].is_number_unsigned())
        throw ValidationError("plan: missing unsigned \"dimension\"");
    plan.dimension = j["dimension"].get<std::uint32_t>();
    if (plan.dimension < 1 || plan.dimension > kMaxDimension)
        throw ValidationError("plan: dimension out of range [1, 65536]");
    if (!j.contains("entries") || !j["entries"].is_array() || j["entries"].empty())
        throw ValidationError("plan: \"entries\" must be a non-empty array");

    std::set<std::string> names;
    for (const auto& e : j["entries"]) {
        if (!e.is_object()) throw ValidationError("plan entry must be an object");
        for (auto it = e.begin(); it != e.end(); ++it)
            if (it.key() != "name" && it.key() != "base" && it.key() != "beta" &&
                it.key() != "count" && it.key() != "terms")
                throw ValidationError("plan entry: unknown field \"" + it.key() + "\"");

        PlanEntry entry;
        if (!e.contains("name") || !e["name"].is_string())
            throw ValidationError("plan entry: missing \"name\"");
        entry.name = e["name"].get<std::string>();
        if (!names.insert(entry.name).second)
            throw ValidationError("plan: duplicate entry name \"" + entry.name + "\"");

        if (!e.contains("base") || !e["base"].is_string())
            throw ValidationError("plan entry \"" + entry.name + "\": missing \"base\"");
        entry.base = e["base"].get<std::string>();
        if (!class_id_of(entry.base))
            throw ValidationError("plan entry \"" + entry.name + "\": unknown class \"" +
                                  entry.base + "\"");

        if (!e.contains("beta") || !e["beta"].is_number())
            throw ValidationError("plan entry \"" + entry.name + "\": missing \"beta\"");
        entry.beta = e["beta"].get<double>();
        if (!(entry.beta > 0.0 && entry.beta <= 100.0))
            throw ValidationError("plan entry \"" + entry.name + "\": beta must be in (0, 100]");

        if (e.contains("count")) {
            if (!e["count"].is_number_unsigned() || e["count"].get<std::uint64_t>() < 1)
                throw ValidationError("plan entry \"" + entry.name + "\": count must be >= 1");
            entry.count = e["count"].get<std::uint64_t>();
        }

        if (!e.contains("terms") || !e["terms"].is_array() || e["terms"].empty())
            throw ValidationError("plan entry \"" + entry.name +
                                  "\": \"terms\" must be a non-empty array");
        for (const auto& t : e["terms"]) {
            if (!t.is_object() || !t.contains("class") || !t.contains("weight") ||
                !t["class"].is_string() || !t["weight"].is_number())
                throw ValidationError("plan entry \"" + entry.name +
                                      "\": each term needs {\"class\", \"weight\"}");
            const std::string cls = t["class"].get<std::string>();
            if (!class_id_of(cls))
                throw ValidationError("plan entry \"" + entry.name + "\": unknown class \"" +
                                      cls + "\"");
            entry.terms.emplace_back(cls, t["weight"].get<double>());
        }
        plan.entries.push_back(std::move(entry));
    }
    return plan;
}

PlanOutput execute_plan(const DatasetPlan& plan, const StatsRegistry& registry) {
    // Validate coverage and dimensions up front.
    for (const auto& entry : plan.entries) {
        auto check = [&](const std::string& cls) {
            const auto it = registry.find(cls);
            if (it == registry.end())
                throw ValidationError("plan entry \"" + entry.name +
                                      "\": no stats for class \"" + cls + "\"");
            if (it->second.d() != plan.dimension)
                throw ValidationError("plan entry \"" + entry.name + "\": stats for \"" + cls +
                                      "\" have dimension " + std::to_string(it->second.d()) +
                                      ", plan wants " + std::to_string(plan.dimension));
        };
        check(entry.base);
        for (const auto& [cls, weight] : entry.terms) check(cls);
    }

    PlanOutput out;
    out.store.dimension = plan.dimension;
    const std::uint64_t total = plan.total_count();
    out.store.ids.resize(total);
    out.store.data.resize(total * plan.dimension);
    out.manifest.resize(total);

    const std::size_t d = plan.dimension;
    std::uint64_t next_id = 0;
    for (std::size_t ei = 0; ei < plan.entries.size(); ++ei) {
        const PlanEntry& entry = plan.entries[ei];
        const ClassStats& base = registry.at(entry.base);
        std::vector<WeightedStats> terms;
        for (const auto& [cls, weight] : entry.terms)
            terms.push_back({&registry.at(cls), weight});

        // Independent substream per entry: adding an entry never perturbs
        // the draws of the others.
        GaussianStream stream(plan.seed ^ static_cast<std::uint64_t>(ei));
        std::vector<double> draws(entry.count * d);
        for (auto& x : draws) x = stream.next();

        const std::uint64_t id0 = next_id;
        std::exception_ptr first_error;
        kernels::for_each_index(entry.count, [&](std::size_t draw) {
            try {
                const std::span<const double> z(draws.data() + draw * d, d);
                const std::vector<double> result = multi_feature(z, base, entry.beta, terms);
                std::memcpy(out.store.data.data() + (id0 + draw) * d, result.data(),
                            d * sizeof(double));
            } catch (...) {
#pragma omp critical
                if (!first_error) first_error = std::current_exception();
            }
        });
        if (first_error) std::rethrow_exception(first_error);

        for (std::uint64_t draw = 0; draw < entry.count; ++draw) {
            out.store.ids[id0 + draw] = id0 + draw;
            out.manifest[id0 + draw] = {id0 + draw, entry.name, draw};
        }
        next_id += entry.count;
    }

    out.store.manifest["seed"] = plan.seed;
    out.store.manifest["source"] = "plan";
    out.store.manifest["entries"] = [&] {
        auto arr = nlohmann::json::array();
        for (const auto& e : plan.entries) arr.push_back(e.name);
        return arr;
    }();
    return out;
}

void write_plan_manifest(const std::filesystem::path& path,
                         const std::vector<ManifestRow>& manifest) {
    std::string out;
    for (const auto& row : manifest) {
        nlohmann::json j;
        j["id"] = row.id;
        j["entry"] = row.entry;
        j["draw"] = row.draw;
        out += j.dump();
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open \"" + path.string() + "\" for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failure on \"" + path.string() + "\"");
}

double sparsity_score(const CoOccurrenceMatrix& m) {
    std::size_t cross = 0;
    std::size_t sparse = 0;
    for (std::size_t a = 0; a < kNumClasses; ++a)
        for (std::size_t b = 0; b < kNumClasses; ++b) {
            if (a == b || group_of_class(a) == group_of_class(b)) continue;
            ++cross;
            if (m.m[a][b] < 0.01) ++sparse;
        }
    return static_cast<double>(sparse) / static_cast<double>(cross);
}

nlohmann::json balance_report(const LabelTable& labels) {
    nlohmann::json j = co_occurrence_report(labels);
    j["sparsity"] = sparsity_score(co_occurrence(labels));
    return j;
}

} // namespace ganalyzer
