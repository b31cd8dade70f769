#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ganalyzer/latent_store.hpp"
#include "ganalyzer/linalg.hpp"

namespace ganalyzer {

// Per-class eigen-statistics: mean, eigenvalues (descending) and orthonormal
// eigenvectors of the sample covariance of the class members.
struct ClassStats {
    std::string class_id;
    std::uint64_t k = 0;         // sample count the fit used
    std::vector<double> mean;    // d
    std::vector<double> lambdas; // t, non-increasing, >= 0
    Matrix eigvecs;              // d x t, orthonormal columns

    std::uint32_t d() const { return static_cast<std::uint32_t>(mean.size()); }
    std::uint32_t t() const { return static_cast<std::uint32_t>(lambdas.size()); }

    // Invariant check (orthonormality, ordering, shape); throws on violation.
    void validate() const;
};

// Projection coefficients of a centered latent vector in the class eigenbasis.
struct BVector {
    std::vector<double> coeffs;
    bool clamped = false;
};

struct TruncatedStats {
    double beta = 100.0;
    std::uint32_t t_prime = 0;
    Matrix v_lead; // d x t_prime, leading columns of the source eigvecs
};

// Fits mean/covariance eigen-statistics over the chosen store records.
// ids are canonicalized (sorted, deduplicated) before accumulation, so any
// presentation order of the same id set produces bitwise-identical results.
// When k < d the k x k centered Gram matrix is decomposed instead of the
// d x d covariance; eigenvalues below 1e-10 * lambda_max and beyond index
// k-2 are truncated, and each eigenvector is sign-normalized so its
// largest-magnitude component (lowest index on ties) is positive.
ClassStats compute_class_stats(const LatentStore& store, std::vector<std::uint64_t> ids,
                               std::string class_id);

// b = V^T (z - m)
BVector project_b(const ClassStats& stats, std::span<const double> z);

// b~_i = clamp(b_i, -3 sqrt(lambda_i), +3 sqrt(lambda_i))
BVector clamp_b(const ClassStats& stats, const BVector& b);

// m + V b
std::vector<double> reconstruct(const ClassStats& stats, const BVector& b);

// Keeps the leading ceil(beta/100 * t) eigenvectors, at least one.
TruncatedStats truncate_stats(const ClassStats& stats, double beta);

// Stats bundle file:
//   "GNST" | version u32 LE | class-id (u32 LE length + UTF-8) | k u64 LE
//   | d u32 LE | t u32 LE | m (d f64 LE) | lambda (t f64 LE)
//   | V column-major (d*t f64 LE)
void write_stats_bundle(const std::filesystem::path& path, const ClassStats& stats);
ClassStats read_stats_bundle(const std::filesystem::path& path);

} // namespace ganalyzer
