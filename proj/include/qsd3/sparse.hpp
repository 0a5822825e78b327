#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace qsd3 {

using cplx = std::complex<double>;

// Compressed-sparse-row complex matrix. Rows are kept sorted by column and
// deduplicated, so structural comparisons and Hermiticity checks are cheap.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::int64_t> row_ptr; // size rows+1
    std::vector<int> col;              // size nnz
    std::vector<cplx> val;             // size nnz

    std::int64_t nnz() const { return static_cast<std::int64_t>(val.size()); }
    bool square() const { return rows == cols; }
};

struct Triplet {
    int r;
    int c;
    cplx v;
};

// Build CSR from an unordered triplet list; duplicates are summed, exact
// zeros produced by cancellation are kept (harmless) but zero inputs dropped.
SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);

SparseMatrix identity(int n);
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix scale(const SparseMatrix& a, cplx factor);
SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix dagger(const SparseMatrix& a);

// Kronecker product, first factor slowest-varying index.
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix kron3(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& c);

// max_ij |A_ij - conj(A_ji)|; 0 for exactly Hermitian matrices.
double hermiticity_defect(const SparseMatrix& a);

// max_ij |A_ij - B_ij| over the union of both patterns.
double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b);

} // namespace qsd3
