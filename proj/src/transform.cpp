#include "ganalyzer/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ganalyzer/kernels.hpp"
#include "ganalyzer/taxonomy.hpp"

namespace ganalyzer {

namespace {

// Canonical summation order for multi-term sums: ascending class id, with
// non-taxonomy names (hand-built stats) after, lexicographically.
std::pair<std::size_t, std::string_view> class_order_key(std::string_view name) {
    if (auto id = class_id_of(name)) return {*id, name};
    return {kNumClasses, name};
}

void check_dims(std::size_t z_dim, const ClassStats& stats, const char* op) {
    if (z_dim != stats.d())
        throw ValidationError(std::string(op) + ": vector dimension " + std::to_string(z_dim) +
                              " does not match stats dimension " + std::to_string(stats.d()));
}

void check_finite(const std::vector<double>& v, const char* op) {
    for (double x : v)
        if (!std::isfinite(x))
            throw NumericError(std::string(op) + ": non-finite component in output");
}

std::vector<double> clamped_projection(const ClassStats& stats, std::span<const double> z) {
    return clamp_b(stats, project_b(stats, z)).coeffs;
}

} // namespace

std::string to_string(EditMode mode) {
    switch (mode) {
        case EditMode::edit: return "edit";
        case EditMode::feature: return "feature";
        case EditMode::psi: return "psi";
        case EditMode::multi_edit: return "multi-edit";
        case EditMode::multi_feature: return "multi-feature";
        case EditMode::disentangled_edit: return "disentangled-edit";
    }
    return "edit";
}

EditMode edit_mode_from_string(const std::string& s) {
    if (s == "edit") return EditMode::edit;
    if (s == "feature") return EditMode::feature;
    if (s == "psi") return EditMode::psi;
    if (s == "multi-edit") return EditMode::multi_edit;
    if (s == "multi-feature") return EditMode::multi_feature;
    if (s == "disentangled-edit") return EditMode::disentangled_edit;
    throw ValidationError("unknown edit mode \"" + s + "\"");
}

EditSpec EditSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("edit spec must be a JSON object");
    static const std::vector<std::string> known = {"mode", "base",  "alpha",
                                                   "beta", "terms", "undesired"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ValidationError("edit spec: unknown field \"" + it.key() + "\"");

    EditSpec spec;
    if (!j.contains("mode") || !j["mode"].is_string())
        throw ValidationError("edit spec: missing \"mode\"");
    spec.mode = edit_mode_from_string(j["mode"].get<std::string>());
    if (!j.contains("base") || !j["base"].is_string())
        throw ValidationError("edit spec: missing \"base\"");
    spec.base = j["base"].get<std::string>();

    if (j.contains("alpha")) {
        if (!j["alpha"].is_number()) throw ValidationError("edit spec: alpha must be a number");
        spec.alpha = j["alpha"].get<double>();
    }
    if (j.contains("beta")) {
        if (!j["beta"].is_number()) throw ValidationError("edit spec: beta must be a number");
        spec.beta = j["beta"].get<double>();
    }
    if (j.contains("terms")) {
        if (!j["terms"].is_array()) throw ValidationError("edit spec: terms must be an array");
        for (const auto& t : j["terms"]) {
            if (!t.is_object() || !t.contains("class") || !t.contains("weight") ||
                !t["class"].is_string() || !t["weight"].is_number())
                throw ValidationError("edit spec: each term needs {\"class\", \"weight\"}");
            for (auto it = t.begin(); it != t.end(); ++it)
                if (it.key() != "class" && it.key() != "weight")
                    throw ValidationError("edit spec: unknown term field \"" + it.key() + "\"");
            spec.terms.emplace_back(t["class"].get<std::string>(), t["weight"].get<double>());
        }
    }
    if (j.contains("undesired")) {
        if (!j["undesired"].is_array())
            throw ValidationError("edit spec: undesired must be an array");
        for (const auto& u : j["undesired"]) {
            if (!u.is_object() || !u.contains("class") || !u.contains("delta") ||
                !u["class"].is_string() || !u["delta"].is_number())
                throw ValidationError("edit spec: each undesired entry needs {\"class\", \"delta\"}");
            for (auto it = u.begin(); it != u.end(); ++it)
                if (it.key() != "class" && it.key() != "delta")
                    throw ValidationError("edit spec: unknown undesired field \"" + it.key() + "\"");
            spec.undesired.emplace_back(u["class"].get<std::string>(), u["delta"].get<double>());
        }
    }
    spec.validate();
    return spec;
}

void EditSpec::validate() const {
    const bool needs_alpha = mode == EditMode::edit || mode == EditMode::psi ||
                             mode == EditMode::disentangled_edit;
    const bool needs_beta = mode == EditMode::feature || mode == EditMode::psi ||
                            mode == EditMode::multi_feature;
    const bool needs_terms = mode == EditMode::multi_edit || mode == EditMode::multi_feature;

    if (base.empty()) throw ValidationError("edit spec: base class is required");
    if (needs_alpha) {
        if (!alpha) throw ValidationError("edit spec: alpha is required for mode " + to_string(mode));
        if (!(*alpha >= 1.0)) throw ValidationError("alpha must be >= 1");
    }
    if (needs_beta) {
        if (!beta) throw ValidationError("edit spec: beta is required for mode " + to_string(mode));
        if (!(*beta > 0.0 && *beta <= 100.0)) throw ValidationError("beta must be in (0, 100]");
    }
    if (needs_terms && terms.empty())
        throw ValidationError("edit spec: terms must be non-empty for mode " + to_string(mode));
    if (mode == EditMode::disentangled_edit)
        for (const auto& [cls, delta] : undesired)
            if (!(delta > 0.0))
                throw ValidationError("undesired delta for \"" + cls + "\" must be > 0");
}

std::vector<double> edit(std::span<const double> z, const ClassStats& stats, double alpha) {
    check_dims(z.size(), stats, "edit");
    if (!(alpha >= 1.0)) throw ValidationError("alpha must be >= 1");

    const std::vector<double> b = clamped_projection(stats, z);
    std::vector<double> out(stats.d(), 0.0);
    for (std::size_t c = 0; c < stats.t(); ++c) {
        const double* col = stats.eigvecs.col(c);
        const double bc = b[c];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += col[i] * bc;
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * stats.mean[i];
    check_finite(out, "edit");
    return out;
}

std::vector<double> feature_synth(std::span<const double> z, const ClassStats& stats,
                                  double beta) {
    check_dims(z.size(), stats, "feature_synth");
    const TruncatedStats trunc = truncate_stats(stats, beta); // validates beta, t > 0

    const std::vector<double> b = clamped_projection(stats, z);
    std::vector<double> out(stats.d(), 0.0);
    for (std::size_t c = 0; c < trunc.t_prime; ++c) {
        const double* col = trunc.v_lead.col(c);
        const double bc = b[c];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += col[i] * bc;
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += stats.mean[i];
    check_finite(out, "feature_synth");
    return out;
}

std::pair<std::vector<double>, std::vector<double>> psi(std::span<const double> z,
                                                        const ClassStats& stats, double alpha,
                                                        double beta) {
    return {feature_synth(z, stats, beta), edit(z, stats, alpha)};
}

namespace {

void sort_canonical(std::vector<WeightedStats>& terms) {
    std::stable_sort(terms.begin(), terms.end(), [](const WeightedStats& a, const WeightedStats& b) {
        return class_order_key(a.stats->class_id) < class_order_key(b.stats->class_id);
    });
}

// sum_i w_i m_i + basis b, shared by both multi-term transforms.
std::vector<double> weighted_means_plus_span(const std::vector<WeightedStats>& terms,
                                             const Matrix& basis, std::size_t rank,
                                             const std::vector<double>& b, std::size_t d,
                                             const char* op) {
    std::vector<double> out(d, 0.0);
    for (std::size_t c = 0; c < rank; ++c) {
        const double* col = basis.col(c);
        const double bc = b[c];
        for (std::size_t i = 0; i < d; ++i) out[i] += col[i] * bc;
    }
    for (const auto& term : terms) {
        if (term.stats->d() != d)
            throw ValidationError(std::string(op) + ": term class \"" + term.stats->class_id +
                                  "\" has mismatched dimension");
        const double w = term.weight;
        for (std::size_t i = 0; i < d; ++i) out[i] += w * term.stats->mean[i];
    }
    check_finite(out, op);
    return out;
}

} // namespace

std::vector<double> multi_edit(std::span<const double> z, const ClassStats& base,
                               std::vector<WeightedStats> terms) {
    check_dims(z.size(), base, "multi_edit");
    if (terms.empty()) throw ValidationError("multi_edit: terms must be non-empty");
    sort_canonical(terms);

    const std::vector<double> b = clamped_projection(base, z);
    return weighted_means_plus_span(terms, base.eigvecs, base.t(), b, base.d(), "multi_edit");
}

std::vector<double> multi_feature(std::span<const double> z, const ClassStats& base, double beta,
                                  std::vector<WeightedStats> terms) {
    check_dims(z.size(), base, "multi_feature");
    if (terms.empty()) throw ValidationError("multi_feature: terms must be non-empty");
    sort_canonical(terms);

    const TruncatedStats trunc = truncate_stats(base, beta);
    const std::vector<double> b = clamped_projection(base, z);
    return weighted_means_plus_span(terms, trunc.v_lead, trunc.t_prime, b, base.d(),
                                    "multi_feature");
}

std::vector<double> disentangled_edit(std::span<const double> z, const ClassStats& desired,
                                      double alpha, std::vector<UndesiredMean> undesired) {
    check_dims(z.size(), desired, "disentangled_edit");
    if (!(alpha >= 1.0)) throw ValidationError("alpha must be >= 1");
    for (const auto& u : undesired) {
        if (!(u.delta > 0.0)) throw ValidationError("undesired delta must be > 0");
        if (u.mean.size() != desired.d())
            throw ValidationError("disentangled_edit: undesired mean has mismatched dimension");
    }
    std::stable_sort(undesired.begin(), undesired.end(),
                     [](const UndesiredMean& a, const UndesiredMean& b) {
                         return class_order_key(a.class_id) < class_order_key(b.class_id);
                     });

    std::vector<double> out = edit(z, desired, alpha);
    for (const auto& u : undesired)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= u.delta * u.mean[i];
    check_finite(out, "disentangled_edit");
    return out;
}

namespace {

const ClassStats& require_stats(const StatsRegistry& registry, const std::string& cls) {
    const auto it = registry.find(cls);
    if (it == registry.end())
        throw ValidationError("no stats bundle loaded for class \"" + cls + "\"");
    return it->second;
}

} // namespace

TransformOutput apply_spec(const LatentStore& store, const EditSpec& spec,
                           const StatsRegistry& registry) {
    spec.validate();
    const ClassStats& base = require_stats(registry, spec.base);
    if (base.d() != store.dimension)
        throw ValidationError("stats dimension " + std::to_string(base.d()) +
                              " does not match store dimension " + std::to_string(store.dimension));

    std::vector<WeightedStats> terms;
    for (const auto& [cls, weight] : spec.terms)
        terms.push_back({&require_stats(registry, cls), weight});

    std::vector<UndesiredMean> undesired;
    for (const auto& [cls, delta] : spec.undesired) {
        const ClassStats& s = require_stats(registry, cls);
        undesired.push_back({s.mean, delta, cls});
    }

    TransformOutput out;
    out.primary.dimension = store.dimension;
    out.primary.ids = store.ids;
    out.primary.data.resize(store.data.size());
    out.primary.manifest = store.manifest;
    out.primary.manifest["transform"] = to_string(spec.mode);
    out.primary.manifest["base"] = spec.base;

    const bool want_feature = spec.mode == EditMode::psi;
    if (want_feature) {
        out.feature.emplace();
        out.feature->dimension = store.dimension;
        out.feature->ids = store.ids;
        out.feature->data.resize(store.data.size());
        out.feature->manifest = out.primary.manifest;
    }

    const std::size_t d = store.dimension;
    std::exception_ptr first_error;
    kernels::for_each_index(store.count(), [&](std::size_t i) {
        try {
            const auto z = store.vec(i);
            std::vector<double> result;
            switch (spec.mode) {
                case EditMode::edit:
                    result = edit(z, base, *spec.alpha);
                    break;
                case EditMode::feature:
                    result = feature_synth(z, base, *spec.beta);
                    break;
                case EditMode::psi: {
                    auto [fb, id_vec] = psi(z, base, *spec.alpha, *spec.beta);
                    std::memcpy(out.feature->data.data() + i * d, fb.data(), d * sizeof(double));
                    result = std::move(id_vec);
                    break;
                }
                case EditMode::multi_edit:
                    result = multi_edit(z, base, terms);
                    break;
                case EditMode::multi_feature:
                    result = multi_feature(z, base, *spec.beta, terms);
                    break;
                case EditMode::disentangled_edit:
                    result = disentangled_edit(z, base, *spec.alpha, undesired);
                    break;
            }
            std::memcpy(out.primary.data.data() + i * d, result.data(), d * sizeof(double));
        } catch (...) {
#pragma omp critical
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

} // namespace ganalyzer
