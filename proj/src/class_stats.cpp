#include "ganalyzer/class_stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <unistd.h>

#include "ganalyzer/eigen_sym.hpp"
#include "ganalyzer/error.hpp"
#include "ganalyzer/kernels.hpp"

namespace ganalyzer {

namespace {

constexpr char kMagic[4] = {'G', 'N', 'S', 'T'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr double kRankEps = 1e-10;

// Largest-magnitude component positive; exact magnitude ties resolved by the
// lowest index.
void sign_normalize(Matrix& v) {
    for (std::size_t c = 0; c < v.cols(); ++c) {
        double* col = v.col(c);
        std::size_t pivot = 0;
        double best = std::abs(col[0]);
        for (std::size_t i = 1; i < v.rows(); ++i) {
            const double a = std::abs(col[i]);
            if (a > best) {
                best = a;
                pivot = i;
            }
        }
        if (col[pivot] < 0.0)
            for (std::size_t i = 0; i < v.rows(); ++i) col[i] = -col[i];
    }
}

} // namespace

void ClassStats::validate() const {
    const std::size_t dim = mean.size();
    if (dim == 0) throw ValidationError("class stats must have dimension >= 1");
    if (eigvecs.rows() != dim || eigvecs.cols() != lambdas.size())
        throw ValidationError("class stats eigenvector shape inconsistent");
    for (double m : mean)
        if (!std::isfinite(m)) throw ValidationError("non-finite mean component");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] >= 0.0)) throw ValidationError("eigenvalues must be >= 0");
        if (i > 0 && lambdas[i] > lambdas[i - 1])
            throw ValidationError("eigenvalues must be non-increasing");
    }
    // Pairwise orthonormality within 1e-8.
    for (std::size_t a = 0; a < eigvecs.cols(); ++a) {
        for (std::size_t b = a; b < eigvecs.cols(); ++b) {
            double acc = 0.0;
            const double* ca = eigvecs.col(a);
            const double* cb = eigvecs.col(b);
            for (std::size_t i = 0; i < dim; ++i) acc += ca[i] * cb[i];
            const double want = (a == b) ? 1.0 : 0.0;
            if (std::abs(acc - want) > 1e-8)
                throw ValidationError("eigenvector columns are not orthonormal");
        }
    }
}

ClassStats compute_class_stats(const LatentStore& store, std::vector<std::uint64_t> ids,
                               std::string class_id) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    const std::size_t k = ids.size();
    const std::size_t d = store.dimension;
    if (k < 2)
        throw ValidationError("class \"" + class_id + "\": need at least 2 samples, got " +
                              std::to_string(k));

    // Gather the subset contiguously in canonical (ascending id) order.
    std::vector<double> data(k * d);
    for (std::size_t i = 0; i < k; ++i) {
        const auto idx = store.index_of(ids[i]);
        if (!idx)
            throw ValidationError("id " + std::to_string(ids[i]) + " not present in store");
        std::memcpy(data.data() + i * d, store.vec(*idx).data(), d * sizeof(double));
    }

    ClassStats stats;
    stats.class_id = std::move(class_id);
    stats.k = k;
    stats.mean.resize(d);
    kernels::mean(data.data(), k, d, stats.mean.data());

    // Eigendecompose whichever of covariance (d x d) and centered Gram (k x k)
    // is smaller; both yield the same spectrum up to the 1/(k-1) scale.
    std::vector<double> values; // descending after this block
    Matrix vectors;             // paired eigenvectors, d x (#values)

    if (k < d) {
        std::vector<double> gram(k * k);
        kernels::gram(data.data(), k, d, stats.mean.data(), gram.data());
        SymEigen eg = sym_eigen(k, gram);

        // Candidate pairs in descending eigenvalue order.
        std::vector<double> mu(eg.values.rbegin(), eg.values.rend());
        const double mu_max = mu.empty() ? 0.0 : std::max(mu[0], 0.0);
        std::size_t keep = 0;
        while (keep < mu.size() && mu[keep] > 0.0 && mu[keep] >= kRankEps * mu_max) ++keep;
        keep = std::min(keep, k - 1);

        values.resize(keep);
        vectors = Matrix(d, keep);
        for (std::size_t j = 0; j < keep; ++j) {
            const std::size_t src = k - 1 - j; // ascending -> descending
            values[j] = mu[j] / static_cast<double>(k - 1);
            // v = centered^T u, then normalized.
            double* out = vectors.col(j);
            const double* u = eg.vectors.col(src);
            for (std::size_t c = 0; c < d; ++c) {
                double acc = 0.0;
                for (std::size_t s = 0; s < k; ++s)
                    acc += u[s] * (data[s * d + c] - stats.mean[c]);
                out[c] = acc;
            }
            double norm = 0.0;
            for (std::size_t c = 0; c < d; ++c) norm += out[c] * out[c];
            norm = std::sqrt(norm);
            if (!(norm > 0.0)) throw NumericError("gram-route eigenvector collapsed to zero");
            for (std::size_t c = 0; c < d; ++c) out[c] /= norm;
        }
    } else {
        std::vector<double> cov(d * d);
        kernels::covariance(data.data(), k, d, stats.mean.data(), cov.data());
        SymEigen eg = sym_eigen(d, cov);

        std::vector<double> lam(eg.values.rbegin(), eg.values.rend());
        const double lam_max = lam.empty() ? 0.0 : std::max(lam[0], 0.0);
        std::size_t keep = 0;
        while (keep < lam.size() && lam[keep] > 0.0 && lam[keep] >= kRankEps * lam_max) ++keep;
        keep = std::min(keep, k - 1);

        values.assign(lam.begin(), lam.begin() + keep);
        vectors = Matrix(d, keep);
        for (std::size_t j = 0; j < keep; ++j) {
            const std::size_t src = d - 1 - j;
            for (std::size_t i = 0; i < d; ++i) vectors(i, j) = eg.vectors(i, src);
        }
    }

    stats.lambdas = std::move(values);
    stats.eigvecs = std::move(vectors);
    sign_normalize(stats.eigvecs);
    return stats;
}

BVector project_b(const ClassStats& stats, std::span<const double> z) {
    if (z.size() != stats.d())
        throw ValidationError("vector dimension " + std::to_string(z.size()) +
                              " does not match stats dimension " + std::to_string(stats.d()));
    std::vector<double> centered(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) centered[i] = z[i] - stats.mean[i];
    BVector b;
    b.coeffs = tmatvec(stats.eigvecs, centered);
    b.clamped = false;
    return b;
}

BVector clamp_b(const ClassStats& stats, const BVector& b) {
    if (b.coeffs.size() != stats.t())
        throw ValidationError("b-vector length " + std::to_string(b.coeffs.size()) +
                              " does not match stats rank " + std::to_string(stats.t()));
    BVector out;
    out.coeffs.resize(b.coeffs.size());
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) {
        const double bound = 3.0 * std::sqrt(stats.lambdas[i]);
        out.coeffs[i] = std::min(std::max(b.coeffs[i], -bound), bound);
    }
    out.clamped = true;
    return out;
}

std::vector<double> reconstruct(const ClassStats& stats, const BVector& b) {
    if (b.coeffs.size() != stats.t())
        throw ValidationError("b-vector length " + std::to_string(b.coeffs.size()) +
                              " does not match stats rank " + std::to_string(stats.t()));
    std::vector<double> out = matvec(stats.eigvecs, b.coeffs);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += stats.mean[i];
    return out;
}

TruncatedStats truncate_stats(const ClassStats& stats, double beta) {
    if (!(beta > 0.0 && beta <= 100.0))
        throw ValidationError("beta must be in (0, 100]");
    if (stats.t() == 0)
        throw ValidationError("cannot truncate stats with no retained eigenvectors");

    const double raw = std::ceil(beta * static_cast<double>(stats.t()) / 100.0);
    const std::uint32_t t_prime = static_cast<std::uint32_t>(
        std::min<double>(std::max(raw, 1.0), static_cast<double>(stats.t())));

    TruncatedStats out;
    out.beta = beta;
    out.t_prime = t_prime;
    out.v_lead = stats.eigvecs.leading_cols(t_prime);
    return out;
}

void write_stats_bundle(const std::filesystem::path& path, const ClassStats& stats) {
    stats.validate();
    std::string out;
    out.append(kMagic, 4);
    auto put_u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    auto put_u64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    auto put_f64 = [&](double v) { put_u64(std::bit_cast<std::uint64_t>(v)); };

    put_u32(kFormatVersion);
    put_u32(static_cast<std::uint32_t>(stats.class_id.size()));
    out += stats.class_id;
    put_u64(stats.k);
    put_u32(stats.d());
    put_u32(stats.t());
    for (double m : stats.mean) put_f64(m);
    for (double l : stats.lambdas) put_f64(l);
    for (double v : stats.eigvecs.storage()) put_f64(v);

    const auto tmp = path.parent_path() /
                     (path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open \"" + tmp.string() + "\" for writing");
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!f) throw IoError("write failure on \"" + tmp.string() + "\"");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename temp file onto \"" + path.string() + "\": " + ec.message());
}

ClassStats read_stats_bundle(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open \"" + path.string() + "\" for reading");
    std::ostringstream buf;
    buf << f.rdbuf();
    const std::string bytes = std::move(buf).str();

    std::size_t pos = 0;
    auto need = [&](std::size_t n, const char* what) {
        if (pos + n > bytes.size())
            throw IoError(std::string("truncated payload: unexpected end of file in ") + what);
    };
    auto get_u32 = [&](const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 4;
        return v;
    };
    auto get_u64 = [&](const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 8;
        return v;
    };
    auto get_f64 = [&](const char* what) { return std::bit_cast<double>(get_u64(what)); };

    need(4, "magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw IoError("bad magic: not a stats bundle file");
    pos = 4;
    const std::uint32_t version = get_u32("version");
    if (version != kFormatVersion)
        throw IoError("unsupported stats bundle version " + std::to_string(version));

    ClassStats stats;
    const std::uint32_t name_len = get_u32("class id length");
    need(name_len, "class id");
    stats.class_id.assign(bytes.data() + pos, name_len);
    pos += name_len;

    stats.k = get_u64("sample count");
    const std::uint32_t d = get_u32("dimension");
    const std::uint32_t t = get_u32("rank");
    if (d < 1 || d > kMaxDimension) throw ValidationError("stats dimension out of range");
    if (t > d) throw ValidationError("stats rank exceeds dimension");

    stats.mean.resize(d);
    for (auto& m : stats.mean) m = get_f64("mean");
    stats.lambdas.resize(t);
    for (auto& l : stats.lambdas) l = get_f64("eigenvalues");
    stats.eigvecs = Matrix(d, t);
    for (auto& v : stats.eigvecs.storage()) v = get_f64("eigenvectors");
    if (pos != bytes.size()) throw IoError("trailing bytes after stats bundle payload");

    stats.validate();
    return stats;
}

} // namespace ganalyzer
