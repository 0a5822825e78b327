#include "qsd3/kernels.hpp"

#include "qsd3/errors.hpp"

namespace qsd3::kernels {

namespace {
inline void check_shapes(const SparseMatrix& a, std::span<const cplx> x, std::span<cplx> y) {
    if (static_cast<int>(x.size()) != a.cols || static_cast<int>(y.size()) != a.rows)
        throw InvalidDimensionError("spmv: vector length does not match matrix shape");
}
} // namespace

void spmv_serial(const SparseMatrix& a, std::span<const cplx> x, std::span<cplx> y) {
    check_shapes(a, x, y);
    for (int r = 0; r < a.rows; ++r) {
        cplx acc{0.0, 0.0};
        for (std::int64_t i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i)
            acc += a.val[i] * x[a.col[i]];
        y[r] = acc;
    }
}

void spmv_omp(const SparseMatrix& a, std::span<const cplx> x, std::span<cplx> y) {
    check_shapes(a, x, y);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < a.rows; ++r) {
        cplx acc{0.0, 0.0};
        for (std::int64_t i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i)
            acc += a.val[i] * x[a.col[i]];
        y[r] = acc;
    }
}

void spmv(const SparseMatrix& a, std::span<const cplx> x, std::span<cplx> y) {
#ifdef _OPENMP
    if (a.rows >= 2048) {
        spmv_omp(a, x, y);
        return;
    }
#endif
    spmv_serial(a, x, y);
}

} // namespace qsd3::kernels
