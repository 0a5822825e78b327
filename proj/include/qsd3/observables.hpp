#pragma once

#include <array>
#include <vector>

#include "qsd3/classical.hpp"
#include "qsd3/fock.hpp"
#include "qsd3/sparse.hpp"

namespace qsd3::qsd {
struct TrajectoryRecord;
}

namespace qsd3::observables {

// <psi|A|psi>. The _real form is for operators claimed Hermitian and throws
// if the imaginary residue exceeds 1e-10.
cplx expectation(const QuantumState& psi, const SparseMatrix& a);
double expectation_real(const QuantumState& psi, const SparseMatrix& a);

struct ModeMoments {
    double q = 0, p = 0, q2 = 0, p2 = 0, n = 0, n2 = 0;
};

struct ObservableSet {
    std::array<ModeMoments, 3> modes;
    std::array<double, 3> delta_q{}, delta_p{}, g2{};
    std::array<double, 3> leakage{}; // population of the top two Fock levels per mode
    double energy = 0.0;             // energy of the expectation values
};

// Second-order correlation (n^2 - n)/n^2 exactly as plotted in the source
// figures. Returns NaN (the "undefined" marker) when mean_n <= floor; the
// vacuum limit is not an error.
inline constexpr double kG2Floor = 1e-6;
double g2(double mean_n, double mean_n2, double floor = kG2Floor);

// Energy obtained by substituting the position/momentum means into the
// classical expression; identical code path to the classical integrator.
double classicalized_energy(const ObservableSet& obs, double beta);

// Precomputed embedded operators for the per-mode moments of a three-mode
// state. compute() is const and safe to call from several threads.
class ThreeModeObservables {
public:
    ThreeModeObservables(int n_max, double beta);

    ObservableSet compute(const QuantumState& psi) const;
    int n_max() const { return n_max_; }

private:
    int n_max_;
    double beta_;
    std::array<SparseMatrix, 3> q_, p_, q2_, p2_, n_, n2_;
};

// --- classical / quantum divergence ----------------------------------------

struct DivergenceReport {
    std::vector<double> times;
    std::vector<double> rms; // phase-space rms of (beta<.> - classical) over modes
    double log_time_ln = 0.0;    // ln(1/beta)
    double log_time_log10 = 0.0; // log10(1/beta); both bases are reported

    // Earliest recorded time with rms >= threshold; +infinity if never.
    double first_crossing(double threshold) const;
};

// Natural cubic-style local interpolation (Catmull-Rom with one-sided ends).
double cubic_interp(const std::vector<double>& xs, const std::vector<double>& ys, double x);

// The classical trajectory must be supplied in the scaled frame (the beta=1
// frame the quantum expectations are multiplied into), and must cover the
// quantum record's time range.
DivergenceReport divergence(const classical::ClassicalTrajectory& scaled_classical,
                            const qsd::TrajectoryRecord& quantum, double beta);

} // namespace qsd3::observables
