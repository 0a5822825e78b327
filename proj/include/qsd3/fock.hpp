#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qsd3/sparse.hpp"

namespace qsd3 {

// Fock levels per mode; the three-mode space has dimension n_max^3.
struct ModeDim {
    int n_max;
    explicit ModeDim(int n);
    int tensor_dim() const { return n_max * n_max * n_max; }
};

// Normalized amplitude vector over a (single- or three-mode) Fock basis.
struct QuantumState {
    std::vector<cplx> amp;

    int dim() const { return static_cast<int>(amp.size()); }
    double norm() const;
    // Rescales to unit norm and returns the norm it had before.
    double normalize();
};

namespace fock {

// Single-mode annihilation operator: a|n> = sqrt(n)|n-1>.
SparseMatrix ladder(int n_max);

// q = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2); hbar = 1, [q,p] = i
// away from the truncation edge.
SparseMatrix position_op(int n_max);
SparseMatrix momentum_op(int n_max);
SparseMatrix number_op(int n_max);

// Places a single-mode operator at mode_index (1..3) with identities on the
// other modes. Mode 1 is the slowest-varying tensor index.
SparseMatrix embed(const SparseMatrix& op, int mode_index, int n_max);

// H = 1/2 sum p_i^2
//   + beta^2 [ (q1^2 q2^2 + q2^2 q3^2 + q1^2 q3^2)/2 + (q1^4+q2^4+q3^4)/32 ].
// Powers of q are matrix powers of the truncated q, so H stays Hermitian.
// Throws CapExceededError if n_max^3 > max_dim.
SparseMatrix hamiltonian(int n_max, double beta, int max_dim = kDefaultDimCap);

// Single-mode restriction used by the master-equation cross-checks:
// h = 1/2 p^2 + beta^2 q^4 / 32.
SparseMatrix single_mode_hamiltonian(int n_max, double beta);

inline constexpr int kDefaultDimCap = 262144; // 64^3

// Coherent state centred at (q0, p0), i.e. D(alpha)|0> with
// alpha = (q0 + i p0)/sqrt(2), built from the closed-form Poissonian
// amplitudes and renormalized after truncation.
// Requires |alpha|^2 + 5|alpha| + 4 < n_max (keeps >= 5 sigma of the photon
// distribution inside the basis); throws TruncationTooSmallError naming the
// smallest adequate n_max otherwise.
QuantumState displaced_vacuum(double q0, double p0, int n_max);

// Smallest n_max accepted by the adequacy heuristic for a given centre.
int required_n_max(double q0, double p0);

// Tensor product of three displaced vacua at
// (-0.2/beta, 0), (0.05/beta, 0), (0.15/beta, 0).
QuantumState initial_state(int n_max, double beta);

// Product of single-mode states, mode 1 slowest index.
QuantumState tensor_product(const QuantumState& m1, const QuantumState& m2,
                            const QuantumState& m3);

} // namespace fock
} // namespace qsd3
