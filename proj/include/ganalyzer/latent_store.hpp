#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganalyzer/error.hpp"

namespace ganalyzer {

inline constexpr std::uint32_t kMaxDimension = 65536;

// Immutable-after-load container of latent vectors. Records are kept as a
// flat row-major buffer so the batch kernels can run straight over it.
struct LatentStore {
    std::uint32_t dimension = 0;
    std::vector<std::uint64_t> ids; // strictly increasing
    std::vector<double> data;       // ids.size() * dimension
    nlohmann::json manifest = nlohmann::json::object();

    std::size_t count() const { return ids.size(); }

    std::span<const double> vec(std::size_t index) const {
        return {data.data() + index * dimension, dimension};
    }

    std::optional<std::size_t> index_of(std::uint64_t id) const;

    // Appends a record; id must exceed the current maximum.
    void append(std::uint64_t id, std::span<const double> v);

    // Full invariant check; throws ValidationError on violation.
    void validate() const;
};

// Binary store file, layout:
//   "GNLZ" | version u32 LE (=1) | d u32 LE | count u64 LE
//   | count x (id u64 LE, d x f64 LE) | manifest length u32 LE | UTF-8 JSON
// Written whole-file to a temp name, then atomically renamed.
void write_store(const std::filesystem::path& path, const LatentStore& store);
LatentStore read_store(const std::filesystem::path& path);

// CSV interchange (RFC-4180 framing, '.' decimal separator). Import
// auto-detects a header row and an optional leading id column; ids are
// synthesized 0..n-1 when absent. Export always writes the header
// "id,c0,...,c{d-1}" with shortest-round-trip number formatting.
LatentStore import_csv(const std::filesystem::path& path, std::uint32_t dimension);
void export_csv(const LatentStore& store, const std::filesystem::path& path);

// Shortest decimal representation that reparses to the same double.
std::string format_double(double v);

} // namespace ganalyzer
