#pragma once

#include <cmath>
#include <complex>
#include <span>

#include "qsd3/sparse.hpp"

// Hot-loop kernels. Each has a serial reference and an OpenMP version;
// the OpenMP spmv parallelizes over rows only, so per-row accumulation
// order is unchanged and both versions produce bitwise-identical results.
// bench/kernel_bench compares their throughput.

namespace qsd3::kernels {

void spmv_serial(const SparseMatrix& a, std::span<const cplx> x, std::span<cplx> y);
void spmv_omp(const SparseMatrix& a, std::span<const cplx> x, std::span<cplx> y);

// Default dispatch: OpenMP when compiled in and the matrix is large enough
// to amortize the fork, serial otherwise.
void spmv(const SparseMatrix& a, std::span<const cplx> x, std::span<cplx> y);

// y += alpha * x
inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// <x|y> with the physicist's convention: x is conjugated.
inline cplx dot(std::span<const cplx> x, std::span<const cplx> y) {
    cplx acc{0.0, 0.0};
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) acc += std::conj(x[i]) * y[i];
    return acc;
}

inline double norm2(std::span<const cplx> x) {
    double acc = 0.0;
    for (const cplx& v : x) acc += std::norm(v);
    return std::sqrt(acc);
}

inline void scale_inplace(double s, std::span<cplx> x) {
    for (cplx& v : x) v *= s;
}

} // namespace qsd3::kernels
