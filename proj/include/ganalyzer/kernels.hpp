#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ganalyzer::kernels {

// Data-parallel kernels. Every kernel exists twice: a serial reference under
// kernels::serial and an OpenMP variant under kernels::par. Both call the same
// per-cell routines, so their outputs are bitwise identical for any thread
// count; tests assert this and the bench target compares their throughput.
//
// Sample buffers are row-major: sample i occupies [i*d, (i+1)*d).

namespace detail {

inline constexpr std::size_t kPairwiseLeaf = 32;

// Pairwise summation with extended-precision leaves. f(i) yields term i.
template <typename F>
long double pairwise_sum_range(std::size_t lo, std::size_t hi, const F& f) {
    if (hi - lo <= kPairwiseLeaf) {
        long double acc = 0.0L;
        for (std::size_t i = lo; i < hi; ++i) acc += static_cast<long double>(f(i));
        return acc;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum_range(lo, mid, f) + pairwise_sum_range(mid, hi, f);
}

template <typename F>
double pairwise_sum(std::size_t n, const F& f) {
    if (n == 0) return 0.0;
    return static_cast<double>(pairwise_sum_range(0, n, f));
}

inline double mean_cell(const double* data, std::size_t k, std::size_t d, std::size_t j) {
    return pairwise_sum(k, [&](std::size_t i) { return data[i * d + j]; }) /
           static_cast<double>(k);
}

// Sample covariance cell (a, b), divisor k-1.
inline double cov_cell(const double* data, std::size_t k, std::size_t d,
                       const double* mean, std::size_t a, std::size_t b) {
    const double ma = mean[a];
    const double mb = mean[b];
    const double s = pairwise_sum(k, [&](std::size_t i) {
        return (data[i * d + a] - ma) * (data[i * d + b] - mb);
    });
    return s / static_cast<double>(k - 1);
}

// Centered Gram cell (i, j): dot product of centered samples i and j.
inline double gram_cell(const double* data, std::size_t d, const double* mean,
                        std::size_t i, std::size_t j) {
    const double* xi = data + i * d;
    const double* xj = data + j * d;
    return pairwise_sum(d, [&](std::size_t c) {
        return (xi[c] - mean[c]) * (xj[c] - mean[c]);
    });
}

} // namespace detail

namespace serial {

inline void mean(const double* data, std::size_t k, std::size_t d, double* out) {
    for (std::size_t j = 0; j < d; ++j) out[j] = detail::mean_cell(data, k, d, j);
}

inline void covariance(const double* data, std::size_t k, std::size_t d,
                       const double* mean, double* out) {
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            const double v = detail::cov_cell(data, k, d, mean, a, b);
            out[a * d + b] = v;
            out[b * d + a] = v;
        }
}

inline void gram(const double* data, std::size_t k, std::size_t d,
                 const double* mean, double* out) {
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            const double v = detail::gram_cell(data, d, mean, i, j);
            out[i * k + j] = v;
            out[j * k + i] = v;
        }
}

template <typename F>
void for_each_index(std::size_t n, const F& f) {
    for (std::size_t i = 0; i < n; ++i) f(i);
}

} // namespace serial

namespace par {

inline void mean(const double* data, std::size_t k, std::size_t d, double* out) {
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(d); ++j)
        out[j] = detail::mean_cell(data, k, d, static_cast<std::size_t>(j));
}

inline void covariance(const double* data, std::size_t k, std::size_t d,
                       const double* mean, double* out) {
    // Flattened upper triangle so cells balance across threads.
    const std::int64_t cells = static_cast<std::int64_t>(d * (d + 1) / 2);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t c = 0; c < cells; ++c) {
        std::size_t a = 0;
        std::size_t rem = static_cast<std::size_t>(c);
        while (rem >= d - a) {
            rem -= d - a;
            ++a;
        }
        const std::size_t b = a + rem;
        const double v = detail::cov_cell(data, k, d, mean, a, b);
        out[a * d + b] = v;
        out[b * d + a] = v;
    }
}

inline void gram(const double* data, std::size_t k, std::size_t d,
                 const double* mean, double* out) {
    const std::int64_t cells = static_cast<std::int64_t>(k * (k + 1) / 2);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t c = 0; c < cells; ++c) {
        std::size_t i = 0;
        std::size_t rem = static_cast<std::size_t>(c);
        while (rem >= k - i) {
            rem -= k - i;
            ++i;
        }
        const std::size_t j = i + rem;
        const double v = detail::gram_cell(data, d, mean, i, j);
        out[i * k + j] = v;
        out[j * k + i] = v;
    }
}

template <typename F>
void for_each_index(std::size_t n, const F& f) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        f(static_cast<std::size_t>(i));
}

} // namespace par

// Dispatch used by the library proper.
inline void mean(const double* data, std::size_t k, std::size_t d, double* out) {
    par::mean(data, k, d, out);
}
inline void covariance(const double* data, std::size_t k, std::size_t d,
                       const double* mean, double* out) {
    par::covariance(data, k, d, mean, out);
}
inline void gram(const double* data, std::size_t k, std::size_t d,
                 const double* mean, double* out) {
    par::gram(data, k, d, mean, out);
}
template <typename F>
void for_each_index(std::size_t n, const F& f) {
    par::for_each_index(n, f);
}

void set_thread_count(int threads); // 0 = hardware default

} // namespace ganalyzer::kernels
