#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ganalyzer/scoring.hpp"

namespace ganalyzer {

// Connection settings for the external generator/classifier services.
struct ServiceEndpoint {
    std::string base_url;
    double timeout_seconds = 30.0;
    std::size_t max_batch = 64;
    int retries = 2;       // additional attempts after the first
    int max_in_flight = 4; // concurrent chunk requests

    void validate() const;
};

// POST /generate {"vectors": [[..]..]} -> {"refs": ["..", ..]}
// Inputs are chunked to max_batch; references come back in input order.
// Any chunk that still fails after retries aborts the call; no partial
// results are returned.
std::vector<std::string> generate_images(const ServiceEndpoint& endpoint,
                                         const std::vector<std::vector<double>>& vectors);

// POST /classify {"refs": [..]} -> {"probs": [{group arrays}..]}
std::vector<AttributeProbabilities> classify_images(const ServiceEndpoint& endpoint,
                                                    const std::vector<std::string>& refs);

// Scorer backed by POST /score {"vectors": ...} -> {"probs": ...}.
// score_store degrades per row: a failed chunk or malformed row yields
// row-level errors instead of aborting the whole store.
class RemoteScorer : public Scorer {
public:
    RemoteScorer(ServiceEndpoint endpoint, std::uint32_t dimension);

    std::uint32_t dimension() const override { return dimension_; }
    AttributeProbabilities score_one(std::span<const double> z) const override;
    std::vector<Outcome> score_store(const LatentStore& store) const override;

private:
    ServiceEndpoint endpoint_;
    std::uint32_t dimension_;
};

// Random v4 UUID (request-id header values).
std::string uuid4();

} // namespace ganalyzer
