#include "qsd3/fock.hpp"

#include <cmath>
#include <string>

#include "qsd3/errors.hpp"
#include "qsd3/kernels.hpp"

namespace qsd3 {

ModeDim::ModeDim(int n) : n_max(n) {
    if (n < 2) throw InvalidDimensionError("n_max must be >= 2, got " + std::to_string(n));
}

double QuantumState::norm() const { return kernels::norm2(amp); }

double QuantumState::normalize() {
    const double n = norm();
    if (n > 0.0) kernels::scale_inplace(1.0 / n, amp);
    return n;
}

namespace fock {

SparseMatrix ladder(int n_max) {
    ModeDim check(n_max);
    std::vector<Triplet> t;
    t.reserve(n_max - 1);
    for (int n = 1; n < n_max; ++n) t.push_back({n - 1, n, cplx{std::sqrt(double(n)), 0.0}});
    return from_triplets(n_max, n_max, std::move(t));
}

SparseMatrix position_op(int n_max) {
    const SparseMatrix a = ladder(n_max);
    return scale(add(a, dagger(a)), cplx{1.0 / std::sqrt(2.0), 0.0});
}

SparseMatrix momentum_op(int n_max) {
    const SparseMatrix a = ladder(n_max);
    return scale(add(dagger(a), scale(a, cplx{-1.0, 0.0})), cplx{0.0, 1.0 / std::sqrt(2.0)});
}

SparseMatrix number_op(int n_max) {
    const SparseMatrix a = ladder(n_max);
    return matmul(dagger(a), a);
}

SparseMatrix embed(const SparseMatrix& op, int mode_index, int n_max) {
    if (mode_index < 1 || mode_index > 3)
        throw InvalidDimensionError("mode_index must be in 1..3");
    if (op.rows != n_max || op.cols != n_max)
        throw InvalidDimensionError("embed: operator is not n_max x n_max");
    const SparseMatrix eye = identity(n_max);
    switch (mode_index) {
        case 1: return kron3(op, eye, eye);
        case 2: return kron3(eye, op, eye);
        default: return kron3(eye, eye, op);
    }
}

SparseMatrix hamiltonian(int n_max, double beta, int max_dim) {
    ModeDim dim(n_max);
    if (beta <= 0.0) throw ValidationError("beta must be > 0");
    if (dim.tensor_dim() > max_dim)
        throw CapExceededError("tensor dimension " + std::to_string(dim.tensor_dim()) +
                               " exceeds cap " + std::to_string(max_dim));
    const SparseMatrix eye = identity(n_max);
    const SparseMatrix q = position_op(n_max);
    const SparseMatrix p = momentum_op(n_max);
    const SparseMatrix q2 = matmul(q, q);
    const SparseMatrix q4 = matmul(q2, q2);
    const SparseMatrix p2 = matmul(p, p);

    const double b2 = beta * beta;
    SparseMatrix h = scale(kron3(p2, eye, eye), 0.5);
    h = add(h, scale(kron3(eye, p2, eye), 0.5));
    h = add(h, scale(kron3(eye, eye, p2), 0.5));
    h = add(h, scale(kron3(q4, eye, eye), b2 / 32.0));
    h = add(h, scale(kron3(eye, q4, eye), b2 / 32.0));
    h = add(h, scale(kron3(eye, eye, q4), b2 / 32.0));
    h = add(h, scale(kron3(q2, q2, eye), b2 / 2.0));
    h = add(h, scale(kron3(eye, q2, q2), b2 / 2.0));
    h = add(h, scale(kron3(q2, eye, q2), b2 / 2.0));
    return h;
}

SparseMatrix single_mode_hamiltonian(int n_max, double beta) {
    const SparseMatrix q = position_op(n_max);
    const SparseMatrix p = momentum_op(n_max);
    const SparseMatrix q2 = matmul(q, q);
    return add(scale(matmul(p, p), 0.5), scale(matmul(q2, q2), beta * beta / 32.0));
}

int required_n_max(double q0, double p0) {
    const double amag = std::hypot(q0, p0) / std::sqrt(2.0);
    return static_cast<int>(std::floor(amag * amag + 5.0 * amag + 4.0)) + 1;
}

QuantumState displaced_vacuum(double q0, double p0, int n_max) {
    ModeDim check(n_max);
    const cplx alpha = cplx{q0, p0} / std::sqrt(2.0);
    const double amag = std::abs(alpha);
    if (!(amag * amag + 5.0 * amag + 4.0 < double(n_max)))
        throw TruncationTooSmallError(
            "displacement (" + std::to_string(q0) + ", " + std::to_string(p0) +
                ") needs n_max >= " + std::to_string(required_n_max(q0, p0)) +
                ", got " + std::to_string(n_max),
            required_n_max(q0, p0));
    QuantumState psi;
    psi.amp.resize(n_max);
    psi.amp[0] = cplx{std::exp(-amag * amag / 2.0), 0.0};
    for (int n = 1; n < n_max; ++n)
        psi.amp[n] = psi.amp[n - 1] * alpha / std::sqrt(double(n));
    psi.normalize();
    return psi;
}

QuantumState tensor_product(const QuantumState& m1, const QuantumState& m2,
                            const QuantumState& m3) {
    QuantumState out;
    out.amp.resize(static_cast<std::size_t>(m1.dim()) * m2.dim() * m3.dim());
    std::size_t k = 0;
    for (int i = 0; i < m1.dim(); ++i)
        for (int j = 0; j < m2.dim(); ++j)
            for (int l = 0; l < m3.dim(); ++l)
                out.amp[k++] = m1.amp[i] * m2.amp[j] * m3.amp[l];
    return out;
}

QuantumState initial_state(int n_max, double beta) {
    if (beta <= 0.0) throw ValidationError("beta must be > 0");
    const QuantumState m1 = displaced_vacuum(-0.2 / beta, 0.0, n_max);
    const QuantumState m2 = displaced_vacuum(0.05 / beta, 0.0, n_max);
    const QuantumState m3 = displaced_vacuum(0.15 / beta, 0.0, n_max);
    QuantumState psi = tensor_product(m1, m2, m3);
    psi.normalize();
    return psi;
}

} // namespace fock
} // namespace qsd3
