#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "qsd3/fock.hpp"
#include "qsd3/oracle.hpp"
#include "qsd3/sparse.hpp"

namespace qsd3::qsd {

// Full definition of one stochastic experiment.
struct SystemParams {
    double beta = 0.25;
    std::array<double, 3> kappa{0.1, 0.1, 0.1}; // per-mode measurement strength
    ModeDim mode_dim{24};
    double dt = 0.0;        // <= 0: derived by the step-size rule (see default_dt)
    double t_end = 20.0;
    int output_stride = 0;  // <= 0: derived so records land every ~0.02 time units
    std::uint64_t seed = 1;

    void validate() const;
    bool closed_system() const { return kappa[0] == 0 && kappa[1] == 0 && kappa[2] == 0; }
};

// --- counter-based noise -----------------------------------------------
//
// Complex Wiener increments with mean(dxi) = 0, mean(dxi^2) = 0,
// mean(|dxi|^2) = dt. Each increment is a pure function of
// (seed, step index, lindblad index), so trajectories are reproducible and
// ensemble streams never collide.

std::uint64_t mix64(std::uint64_t z);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

// Stream seed for trajectory traj_index under a master seed.
std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t traj_index);

struct NoiseIncrement {
    std::vector<cplx> dxi; // one per Lindblad
};

NoiseIncrement draw_noise(std::uint64_t seed, std::uint64_t step_index, int n_lindblads,
                          double dt);
void draw_noise_into(std::uint64_t seed, std::uint64_t step_index, double dt,
                     std::vector<cplx>& dxi);

// --- stepper ------------------------------------------------------------
//
// Euler-Maruyama step of the state-diffusion increment
//   d|psi> = -i H |psi> dt
//          + sum_j [ <L_j^dag> L_j - 1/2 L_j^dag L_j - 1/2 <L_j^dag><L_j> ] |psi> dt
//          + sum_j [ L_j - <L_j> ] |psi> dxi_j
// followed by renormalization. All expectation values are evaluated on the
// incoming state (Ito discipline). The optional semi-implicit flag treats
// the -iH drift with a midpoint solve, for stiff Hamiltonians.
class Stepper {
public:
    Stepper(SparseMatrix hamiltonian, std::vector<SparseMatrix> lindblads,
            bool semi_implicit = false);

    // Advances psi in place; returns the norm before renormalization.
    // noise.dxi.size() must equal n_lindblads().
    double step(QuantumState& psi, double dt, const NoiseIncrement& noise);

    int dim() const { return dim_; }
    int n_lindblads() const { return static_cast<int>(lindblads_.size()); }
    const SparseMatrix& hamiltonian() const { return h_; }
    const std::vector<SparseMatrix>& lindblads() const { return lindblads_; }

private:
    SparseMatrix h_;
    std::vector<SparseMatrix> lindblads_;
    SparseMatrix drift_;      // -iH - 1/2 sum L^dag L   (explicit scheme)
    SparseMatrix damping_;    //       -1/2 sum L^dag L  (semi-implicit scheme)
    bool semi_implicit_ = false;
    int dim_ = 0;
    std::vector<cplx> dpsi_, tmp_, tmp2_;
    std::vector<std::vector<cplx>> lpsi_;
};

// One-shot form used by tests and small experiments.
QuantumState qsd_step(const QuantumState& psi, const SparseMatrix& hamiltonian,
                      const std::vector<SparseMatrix>& lindblads, double dt,
                      const NoiseIncrement& noise);

// Spectral-norm estimate by power iteration with a deterministic start.
double operator_norm_estimate(const SparseMatrix& a, int iterations = 80);

// Step-size rule: dt * |H| < 0.05 and dt * max_i(kappa_i^2 <q_i^2>_0) < 1e-3.
double default_dt(double h_norm_estimate, double max_kappa_sq_qsq);

// --- trajectories ---------------------------------------------------------

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<std::array<double, 3>> mean_q, mean_p, delta_q, delta_p, mean_n;
    std::vector<std::array<double, 3>> g2;      // NaN marks the vacuum-limit case
    std::vector<std::array<double, 3>> leakage; // top-two-level population per mode
    std::vector<double> energy;                 // Eq-style energy of the means
    std::vector<double> norm_before;            // pre-renormalization norm at record steps
    bool norm_valid = true;                     // |norm-1| <= 1e-3 at every step
    bool truncation_suspect = false;            // leakage >= 1e-4 at some record
    bool closed_system = false;
    double worst_norm_dev = 0.0;
    double worst_leakage = 0.0;
    double dt_used = 0.0;
    long n_steps = 0;
};

inline constexpr double kNormTolerance = 1e-3;
inline constexpr double kLeakageThreshold = 1e-4;

struct TrajectoryOutput {
    TrajectoryRecord record;
    std::vector<QuantumState> checkpoint_states; // one per requested checkpoint time
};

// Three-oscillator experiment: H from the quartic Hamiltonian, Lindblads
// L_i = kappa_i q_i for i in measured_modes (1-based), initial state the
// displaced triple vacuum. Deterministic given params.seed.
TrajectoryOutput run_trajectory(const SystemParams& params,
                                const std::vector<int>& measured_modes,
                                const std::vector<double>& checkpoint_times = {},
                                bool semi_implicit = false);

struct EnsembleResult {
    std::vector<TrajectoryRecord> trajectories; // index order = trajectory index
    std::vector<double> checkpoint_times;
    std::vector<oracle::DensityMatrix> mean_density; // empty unless accumulation requested
};

inline constexpr int kDensityDimCap = 4096;

// Independent trajectories with child seeds child_seed(params.seed, i).
// The mean density matrix at each checkpoint is accumulated in trajectory
// index order, so results do not depend on the worker count.
EnsembleResult run_ensemble(const SystemParams& params, const std::vector<int>& measured_modes,
                            int n_traj, const std::vector<double>& checkpoint_times = {},
                            bool accumulate_density = false,
                            int density_dim_cap = kDensityDimCap);

// Generic ensemble-mean density for an arbitrary (H, Ls, psi0) problem; used
// by the master-equation cross-checks on small Hilbert spaces.
std::vector<oracle::DensityMatrix> ensemble_mean_density(
    const SparseMatrix& hamiltonian, const std::vector<SparseMatrix>& lindblads,
    const QuantumState& psi0, double dt, const std::vector<double>& checkpoint_times,
    int n_traj, std::uint64_t master_seed, int density_dim_cap = kDensityDimCap);

} // namespace qsd3::qsd
