#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qsd3/fock.hpp"
#include "qsd3/sparse.hpp"

// Deterministic Lindblad master-equation integrator on small Hilbert spaces.
// Serves as the ground truth the stochastic ensembles are checked against:
// the mean over unravellings must reproduce the master equation.

namespace qsd3::oracle {

using Dense = Eigen::MatrixXcd;

struct DensityMatrix {
    Dense rho;

    int dim() const { return static_cast<int>(rho.rows()); }
    double trace_real() const { return rho.trace().real(); }
    double hermiticity_defect() const;
    double min_eigenvalue() const;
    double purity() const; // Tr(rho^2)

    // Hermitian within 1e-10, unit trace within 1e-10, eigenvalues >= -1e-10.
    bool valid(double tol = 1e-10) const;
};

DensityMatrix pure_state_density(const QuantumState& psi);
Dense to_dense(const SparseMatrix& a);

// drho/dt = -i[H, rho] + sum_j ( L_j rho L_j^dag - 1/2 {L_j^dag L_j, rho} )
Dense lindblad_rhs(const Dense& rho, const Dense& hamiltonian, const std::vector<Dense>& lindblads);

struct LindbladSeries {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
};

// Fixed-step RK4 on the master equation, recording at the requested
// checkpoint times (which must be step-aligned within 1e-9). Throws
// StepSizeError if positivity degrades beyond tolerance at a checkpoint.
LindbladSeries integrate_lindblad(const DensityMatrix& rho0, const Dense& hamiltonian,
                                  const std::vector<Dense>& lindblads, double dt,
                                  const std::vector<double>& checkpoint_times,
                                  double positivity_tol = 1e-6);

// 1/2 sum |eigenvalues(rho - sigma)|, in [0, 1] for valid density matrices.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

} // namespace qsd3::oracle
