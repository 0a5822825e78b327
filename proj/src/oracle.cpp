#include "qsd3/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "qsd3/errors.hpp"

namespace qsd3::oracle {

double DensityMatrix::hermiticity_defect() const {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Dense> es(0.5 * (rho + rho.adjoint()),
                                            Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double DensityMatrix::purity() const { return (rho * rho).trace().real(); }

bool DensityMatrix::valid(double tol) const {
    return hermiticity_defect() < tol && std::abs(trace_real() - 1.0) < tol &&
           min_eigenvalue() > -tol;
}

DensityMatrix pure_state_density(const QuantumState& psi) {
    Eigen::Map<const Eigen::VectorXcd> v(psi.amp.data(), psi.dim());
    return {v * v.adjoint()};
}

Dense to_dense(const SparseMatrix& a) {
    Dense m = Dense::Zero(a.rows, a.cols);
    for (int r = 0; r < a.rows; ++r)
        for (std::int64_t i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i)
            m(r, a.col[i]) = a.val[i];
    return m;
}

Dense lindblad_rhs(const Dense& rho, const Dense& hamiltonian,
                   const std::vector<Dense>& lindblads) {
    if (rho.rows() != rho.cols() || hamiltonian.rows() != rho.rows() ||
        hamiltonian.cols() != rho.cols())
        throw InvalidDimensionError("lindblad_rhs: dimension mismatch");
    const cplx mi{0.0, -1.0};
    Dense d = mi * (hamiltonian * rho - rho * hamiltonian);
    for (const Dense& l : lindblads) {
        if (l.rows() != rho.rows() || l.cols() != rho.cols())
            throw InvalidDimensionError("lindblad_rhs: Lindblad dimension mismatch");
        const Dense ldl = l.adjoint() * l;
        d += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    }
    return d;
}

LindbladSeries integrate_lindblad(const DensityMatrix& rho0, const Dense& hamiltonian,
                                  const std::vector<Dense>& lindblads, double dt,
                                  const std::vector<double>& checkpoint_times,
                                  double positivity_tol) {
    if (dt <= 0.0) throw ValidationError("dt must be > 0");
    if (checkpoint_times.empty()) throw ValidationError("need at least one checkpoint time");
    std::vector<long> ck;
    long n_steps = 0;
    for (double t : checkpoint_times) {
        if (t < 0.0) throw ValidationError("checkpoint times must be >= 0");
        const long s = std::lround(t / dt);
        if (std::abs(s * dt - t) > 1e-9)
            throw ValidationError("checkpoint time " + std::to_string(t) +
                                  " is not on the dt grid");
        ck.push_back(s);
        n_steps = std::max(n_steps, s);
    }

    LindbladSeries series;
    Dense rho = rho0.rho;
    auto record_if_checkpoint = [&](long step) {
        for (std::size_t k = 0; k < ck.size(); ++k) {
            if (ck[k] != step) continue;
            DensityMatrix snap{rho};
            if (snap.min_eigenvalue() < -positivity_tol)
                throw StepSizeError("density matrix lost positivity at t = " +
                                    std::to_string(step * dt) + "; reduce dt");
            series.times.push_back(step * dt);
            series.states.push_back(std::move(snap));
        }
    };

    record_if_checkpoint(0);
    for (long step = 1; step <= n_steps; ++step) {
        const Dense k1 = lindblad_rhs(rho, hamiltonian, lindblads);
        const Dense k2 = lindblad_rhs(rho + 0.5 * dt * k1, hamiltonian, lindblads);
        const Dense k3 = lindblad_rhs(rho + 0.5 * dt * k2, hamiltonian, lindblads);
        const Dense k4 = lindblad_rhs(rho + dt * k3, hamiltonian, lindblads);
        rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        record_if_checkpoint(step);
    }
    return series;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim())
        throw InvalidDimensionError("trace_distance: dimension mismatch");
    const Dense diff = rho.rho - sigma.rho;
    Eigen::SelfAdjointEigenSolver<Dense> es(0.5 * (diff + diff.adjoint()),
                                            Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

} // namespace qsd3::oracle
