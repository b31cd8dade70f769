#pragma once

#include <cstddef>
#include <vector>

#include "ganalyzer/linalg.hpp"

namespace ganalyzer {

struct SymEigen {
    std::vector<double> values; // ascending
    Matrix vectors;             // column j pairs with values[j], orthonormal
};

// Eigendecomposition of a dense symmetric matrix (row-major n*n buffer,
// only symmetry is assumed). Householder tridiagonalization followed by
// implicit-shift QL, the classic EISPACK tred2/tql2 pair. Deterministic:
// identical input bits give identical output bits.
// Throws NumericError if the QL iteration fails to converge.
SymEigen sym_eigen(std::size_t n, const std::vector<double>& a);

} // namespace ganalyzer
