#pragma once

#include <cstddef>
#include <vector>

namespace ganalyzer {

// Dense column-major matrix. Column-major matches the on-disk layout of
// eigenvector blocks, so file IO is a straight memcpy of the storage.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

    double* col(std::size_t c) { return data_.data() + c * rows_; }
    const double* col(std::size_t c) const { return data_.data() + c * rows_; }

    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    // Leading-column slice (shares nothing; copies).
    Matrix leading_cols(std::size_t c) const {
        Matrix m(rows_, c);
        for (std::size_t j = 0; j < c; ++j)
            for (std::size_t i = 0; i < rows_; ++i) m(i, j) = (*this)(i, j);
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// y = M x  (x has cols entries, y has rows entries)
inline std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
    std::vector<double> y(m.rows(), 0.0);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        const double xc = x[c];
        const double* column = m.col(c);
        for (std::size_t r = 0; r < m.rows(); ++r) y[r] += column[r] * xc;
    }
    return y;
}

// y = M^T x  (x has rows entries, y has cols entries)
inline std::vector<double> tmatvec(const Matrix& m, const std::vector<double>& x) {
    std::vector<double> y(m.cols(), 0.0);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        const double* column = m.col(c);
        double acc = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) acc += column[r] * x[r];
        y[c] = acc;
    }
    return y;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

} // namespace ganalyzer
