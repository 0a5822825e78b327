#include "qsd3/qsd.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include "qsd3/errors.hpp"
#include "qsd3/kernels.hpp"
#include "qsd3/observables.hpp"

namespace qsd3::qsd {

void SystemParams::validate() const {
    if (beta <= 0.0) throw ValidationError("beta must be > 0");
    for (double k : kappa)
        if (k < 0.0 || !std::isfinite(k)) throw ValidationError("kappa must be finite and >= 0");
    if (mode_dim.n_max < 2) throw ValidationError("n_max must be >= 2");
    if (t_end <= 0.0) throw ValidationError("t_end must be > 0");
    if (dt < 0.0) throw ValidationError("dt must be >= 0 (0 selects the step-size rule)");
}

// --- noise -----------------------------------------------------------------

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a + 0x9E3779B97F4A7C15ull * (b + 1));
}

std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t traj_index) {
    return hash_combine(hash_combine(master_seed, 0x72616a656374ull), traj_index);
}

namespace {

inline double to_unit_interval(std::uint64_t w) {
    // 53-bit mantissa, strictly inside (0, 1)
    return (double(w >> 11) + 0.5) * 0x1.0p-53;
}

// Standard-normal pair from the counter (seed, step, lindblad) by Box-Muller.
inline void normal_pair(std::uint64_t seed, std::uint64_t step, std::uint64_t j, double& g1,
                        double& g2) {
    const std::uint64_t base = hash_combine(hash_combine(seed, step), j);
    const double u1 = to_unit_interval(mix64(base + 1));
    const double u2 = to_unit_interval(mix64(base + 2));
    const double r = std::sqrt(-2.0 * std::log(u1));
    g1 = r * std::cos(2.0 * std::numbers::pi * u2);
    g2 = r * std::sin(2.0 * std::numbers::pi * u2);
}

} // namespace

void draw_noise_into(std::uint64_t seed, std::uint64_t step_index, double dt,
                     std::vector<cplx>& dxi) {
    const double amp = std::sqrt(dt / 2.0);
    for (std::size_t j = 0; j < dxi.size(); ++j) {
        double g1, g2;
        normal_pair(seed, step_index, j, g1, g2);
        dxi[j] = cplx{amp * g1, amp * g2};
    }
}

NoiseIncrement draw_noise(std::uint64_t seed, std::uint64_t step_index, int n_lindblads,
                          double dt) {
    if (dt <= 0.0) throw ValidationError("draw_noise: dt must be > 0");
    NoiseIncrement n;
    n.dxi.resize(n_lindblads);
    draw_noise_into(seed, step_index, dt, n.dxi);
    return n;
}

// --- stepper -----------------------------------------------------------------

Stepper::Stepper(SparseMatrix hamiltonian, std::vector<SparseMatrix> lindblads,
                 bool semi_implicit)
    : h_(std::move(hamiltonian)), lindblads_(std::move(lindblads)),
      semi_implicit_(semi_implicit) {
    if (!h_.square()) throw InvalidDimensionError("Hamiltonian must be square");
    dim_ = h_.rows;
    for (const SparseMatrix& l : lindblads_)
        if (l.rows != dim_ || l.cols != dim_)
            throw InvalidDimensionError("Lindblad dimension does not match Hamiltonian");

    damping_ = from_triplets(dim_, dim_, {});
    for (const SparseMatrix& l : lindblads_)
        damping_ = add(damping_, scale(matmul(dagger(l), l), cplx{-0.5, 0.0}));
    drift_ = add(scale(h_, cplx{0.0, -1.0}), damping_);

    dpsi_.resize(dim_);
    tmp_.resize(dim_);
    tmp2_.resize(dim_);
    lpsi_.resize(lindblads_.size());
    for (auto& v : lpsi_) v.resize(dim_);
}

double Stepper::step(QuantumState& psi, double dt, const NoiseIncrement& noise) {
    if (psi.dim() != dim_) throw InvalidDimensionError("state dimension mismatch");
    if (static_cast<int>(noise.dxi.size()) != n_lindblads())
        throw InvalidDimensionError("noise increment count != number of Lindblads");

    // Lindblad applications and expectations on the incoming state only.
    for (std::size_t j = 0; j < lindblads_.size(); ++j)
        kernels::spmv(lindblads_[j], psi.amp, lpsi_[j]);

    if (!semi_implicit_) {
        kernels::spmv(drift_, psi.amp, dpsi_);
        kernels::scale_inplace(dt, dpsi_);
    } else {
        // Midpoint form for the Hamiltonian drift:
        //   (1 + iH dt/2) psi' = (1 - iH dt/2) psi,
        // solved by a short Neumann iteration (converges for dt|H| < 2);
        // the damping and measurement terms stay explicit.
        kernels::spmv(h_, psi.amp, tmp_);
        for (int i = 0; i < dim_; ++i) tmp2_[i] = psi.amp[i] - cplx{0.0, 0.5 * dt} * tmp_[i];
        std::vector<cplx>& x = dpsi_; // iterate in place
        x = tmp2_;
        for (int iter = 0; iter < 8; ++iter) {
            kernels::spmv(h_, x, tmp_);
            for (int i = 0; i < dim_; ++i) x[i] = tmp2_[i] - cplx{0.0, 0.5 * dt} * tmp_[i];
        }
        // dpsi currently holds psi'; convert to the increment including damping.
        kernels::spmv(damping_, psi.amp, tmp_);
        for (int i = 0; i < dim_; ++i) dpsi_[i] = x[i] - psi.amp[i] + dt * tmp_[i];
    }

    for (std::size_t j = 0; j < lindblads_.size(); ++j) {
        const cplx e = kernels::dot(psi.amp, lpsi_[j]);
        const cplx drift_coeff = std::conj(e) * dt + noise.dxi[j];
        const cplx state_coeff = -0.5 * std::norm(e) * dt - e * noise.dxi[j];
        kernels::axpy(drift_coeff, lpsi_[j], dpsi_);
        kernels::axpy(state_coeff, psi.amp, dpsi_);
    }

    for (int i = 0; i < dim_; ++i) psi.amp[i] += dpsi_[i];

    const double norm_before = psi.normalize();
    if (!std::isfinite(norm_before) || norm_before == 0.0)
        throw NumericalBlowupError("state norm became non-finite", 0.0, -1);
    return norm_before;
}

QuantumState qsd_step(const QuantumState& psi, const SparseMatrix& hamiltonian,
                      const std::vector<SparseMatrix>& lindblads, double dt,
                      const NoiseIncrement& noise) {
    Stepper stepper(hamiltonian, lindblads);
    QuantumState out = psi;
    stepper.step(out, dt, noise);
    return out;
}

// --- step-size rule ----------------------------------------------------------

double operator_norm_estimate(const SparseMatrix& a, int iterations) {
    if (!a.square()) throw InvalidDimensionError("operator_norm_estimate: non-square");
    std::vector<cplx> v(a.rows), w(a.rows);
    for (int i = 0; i < a.rows; ++i)
        v[i] = cplx{to_unit_interval(mix64(std::uint64_t(i) + 17)) - 0.5, 0.0};
    double nrm = kernels::norm2(v);
    kernels::scale_inplace(1.0 / nrm, v);
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        kernels::spmv(a, v, w);
        estimate = kernels::norm2(w);
        if (estimate == 0.0) return 0.0;
        for (int i = 0; i < a.rows; ++i) v[i] = w[i] / estimate;
    }
    return estimate;
}

double default_dt(double h_norm_estimate, double max_kappa_sq_qsq) {
    double dt = 0.045 / std::max(h_norm_estimate, 1e-12);
    if (max_kappa_sq_qsq > 0.0) dt = std::min(dt, 0.9e-3 / max_kappa_sq_qsq);
    return dt;
}

// --- trajectory runner ---------------------------------------------------------

namespace {

struct StepGrid {
    double dt;
    long n_steps;
    int stride;
};

StepGrid resolve_grid(const SystemParams& params, const SparseMatrix& h,
                      const QuantumState& psi0,
                      const observables::ThreeModeObservables& obs) {
    double dt = params.dt;
    if (dt <= 0.0) {
        const double hnorm = operator_norm_estimate(h);
        const observables::ObservableSet o0 = obs.compute(psi0);
        double worst = 0.0;
        for (int i = 0; i < 3; ++i)
            worst = std::max(worst, params.kappa[i] * params.kappa[i] * o0.modes[i].q2);
        dt = default_dt(hnorm, worst);
    }
    long n_steps = std::lround(std::ceil(params.t_end / dt - 1e-12));
    n_steps = std::max(n_steps, 1L);
    dt = params.t_end / double(n_steps); // exact grid
    int stride = params.output_stride;
    if (stride <= 0) stride = std::max(1, int(std::lround(0.02 / dt)));
    return {dt, n_steps, stride};
}

std::vector<long> checkpoint_steps(const std::vector<double>& times, double dt, long n_steps) {
    std::vector<long> steps;
    steps.reserve(times.size());
    for (double t : times) {
        const long s = std::lround(t / dt);
        if (s < 0 || s > n_steps)
            throw ValidationError("checkpoint time " + std::to_string(t) + " outside run");
        steps.push_back(s);
    }
    return steps;
}

std::vector<SparseMatrix> position_lindblads(const SystemParams& params,
                                             const std::vector<int>& measured_modes) {
    std::vector<SparseMatrix> ls;
    const SparseMatrix q = fock::position_op(params.mode_dim.n_max);
    for (int m : measured_modes) {
        if (m < 1 || m > 3) throw ValidationError("measured mode indices must be in 1..3");
        ls.push_back(scale(fock::embed(q, m, params.mode_dim.n_max),
                           cplx{params.kappa[m - 1], 0.0}));
    }
    return ls;
}

} // namespace

TrajectoryOutput run_trajectory(const SystemParams& params,
                                const std::vector<int>& measured_modes,
                                const std::vector<double>& checkpoint_times,
                                bool semi_implicit) {
    params.validate();
    const int n_max = params.mode_dim.n_max;
    const observables::ThreeModeObservables obs(n_max, params.beta);
    const SparseMatrix h = fock::hamiltonian(n_max, params.beta);
    QuantumState psi = fock::initial_state(n_max, params.beta);
    const StepGrid grid = resolve_grid(params, h, psi, obs);

    Stepper stepper(h, position_lindblads(params, measured_modes), semi_implicit);

    TrajectoryOutput out;
    TrajectoryRecord& rec = out.record;
    rec.closed_system = params.closed_system();
    rec.dt_used = grid.dt;
    rec.n_steps = grid.n_steps;

    const std::vector<long> ck_steps = checkpoint_steps(checkpoint_times, grid.dt, grid.n_steps);

    auto record_point = [&](double t, double norm_before) {
        const observables::ObservableSet o = obs.compute(psi);
        rec.times.push_back(t);
        rec.mean_q.push_back({o.modes[0].q, o.modes[1].q, o.modes[2].q});
        rec.mean_p.push_back({o.modes[0].p, o.modes[1].p, o.modes[2].p});
        rec.delta_q.push_back(o.delta_q);
        rec.delta_p.push_back(o.delta_p);
        rec.mean_n.push_back({o.modes[0].n, o.modes[1].n, o.modes[2].n});
        rec.g2.push_back(o.g2);
        rec.leakage.push_back(o.leakage);
        rec.energy.push_back(o.energy);
        rec.norm_before.push_back(norm_before);
        for (double leak : o.leakage) {
            rec.worst_leakage = std::max(rec.worst_leakage, leak);
            if (leak >= kLeakageThreshold) rec.truncation_suspect = true;
        }
    };

    out.checkpoint_states.resize(ck_steps.size());
    auto take_checkpoint = [&](long step) {
        for (std::size_t k = 0; k < ck_steps.size(); ++k)
            if (ck_steps[k] == step) out.checkpoint_states[k] = psi;
    };

    record_point(0.0, 1.0);
    take_checkpoint(0);

    NoiseIncrement noise;
    noise.dxi.resize(stepper.n_lindblads());
    for (long step = 0; step < grid.n_steps; ++step) {
        draw_noise_into(params.seed, std::uint64_t(step), grid.dt, noise.dxi);
        double norm_before;
        try {
            norm_before = stepper.step(psi, grid.dt, noise);
        } catch (const NumericalBlowupError&) {
            throw NumericalBlowupError("QSD state diverged", (step + 1) * grid.dt, step + 1);
        }
        const double dev = std::abs(norm_before - 1.0);
        rec.worst_norm_dev = std::max(rec.worst_norm_dev, dev);
        if (dev > kNormTolerance) rec.norm_valid = false;
        const long done = step + 1;
        if (done % grid.stride == 0 || done == grid.n_steps)
            record_point(done * grid.dt, norm_before);
        take_checkpoint(done);
    }
    return out;
}

// --- ensembles -----------------------------------------------------------------

namespace {

// Serial, index-ordered rank-1 accumulation keeps the reduction independent
// of how trajectories were scheduled.
void accumulate_projector(oracle::Dense& acc, const QuantumState& psi) {
    const int d = psi.dim();
    Eigen::Map<const Eigen::VectorXcd> v(psi.amp.data(), d);
    acc.noalias() += v * v.adjoint();
}

// Exceptions must not unwind through an OpenMP region; capture and rethrow.
class ParallelGuard {
public:
    template <typename F>
    void run(F&& f) noexcept {
        try {
            f();
        } catch (...) {
#pragma omp critical(qsd3_parallel_guard)
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::exception_ptr error_;
};

} // namespace

EnsembleResult run_ensemble(const SystemParams& params, const std::vector<int>& measured_modes,
                            int n_traj, const std::vector<double>& checkpoint_times,
                            bool accumulate_density, int density_dim_cap) {
    params.validate();
    if (n_traj < 1) throw ValidationError("n_traj must be >= 1");
    const int dim = params.mode_dim.tensor_dim();
    if (accumulate_density && dim > density_dim_cap)
        throw CapExceededError("density accumulation needs dim <= " +
                               std::to_string(density_dim_cap) + ", got " + std::to_string(dim));

    EnsembleResult result;
    result.checkpoint_times = checkpoint_times;
    result.trajectories.resize(n_traj);

    std::vector<oracle::Dense> acc;
    if (accumulate_density)
        acc.assign(checkpoint_times.size(), oracle::Dense::Zero(dim, dim));

    constexpr int kBlock = 16;
    std::vector<TrajectoryOutput> block(kBlock);
    for (int base = 0; base < n_traj; base += kBlock) {
        const int count = std::min(kBlock, n_traj - base);
        ParallelGuard guard;
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < count; ++i) {
            guard.run([&, i] {
                SystemParams traj_params = params;
                traj_params.seed = child_seed(params.seed, std::uint64_t(base + i));
                block[i] = run_trajectory(traj_params, measured_modes,
                                          accumulate_density ? checkpoint_times
                                                             : std::vector<double>{});
            });
        }
        guard.rethrow();
        for (int i = 0; i < count; ++i) {
            result.trajectories[base + i] = std::move(block[i].record);
            if (accumulate_density)
                for (std::size_t k = 0; k < checkpoint_times.size(); ++k)
                    accumulate_projector(acc[k], block[i].checkpoint_states[k]);
        }
    }

    if (accumulate_density) {
        result.mean_density.reserve(acc.size());
        for (oracle::Dense& a : acc)
            result.mean_density.push_back({a / double(n_traj)});
    }
    return result;
}

std::vector<oracle::DensityMatrix> ensemble_mean_density(
    const SparseMatrix& hamiltonian, const std::vector<SparseMatrix>& lindblads,
    const QuantumState& psi0, double dt, const std::vector<double>& checkpoint_times,
    int n_traj, std::uint64_t master_seed, int density_dim_cap) {
    if (n_traj < 1) throw ValidationError("n_traj must be >= 1");
    if (dt <= 0.0) throw ValidationError("dt must be > 0");
    const int dim = psi0.dim();
    if (dim > density_dim_cap)
        throw CapExceededError("density accumulation needs dim <= " +
                               std::to_string(density_dim_cap));
    double t_max = 0.0;
    for (double t : checkpoint_times) t_max = std::max(t_max, t);
    const long n_steps = std::lround(std::ceil(t_max / dt - 1e-12));
    const std::vector<long> ck_steps = checkpoint_steps(checkpoint_times, dt, n_steps);

    std::vector<oracle::Dense> acc(checkpoint_times.size(), oracle::Dense::Zero(dim, dim));

    constexpr int kBlock = 16;
    std::vector<std::vector<QuantumState>> block(kBlock);
    for (int base = 0; base < n_traj; base += kBlock) {
        const int count = std::min(kBlock, n_traj - base);
        ParallelGuard guard;
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < count; ++i) {
            guard.run([&, i] {
                Stepper stepper(hamiltonian, lindblads);
                QuantumState psi = psi0;
                const std::uint64_t seed = child_seed(master_seed, std::uint64_t(base + i));
                std::vector<QuantumState> states(ck_steps.size());
                NoiseIncrement noise;
                noise.dxi.resize(stepper.n_lindblads());
                for (std::size_t k = 0; k < ck_steps.size(); ++k)
                    if (ck_steps[k] == 0) states[k] = psi;
                for (long step = 0; step < n_steps; ++step) {
                    draw_noise_into(seed, std::uint64_t(step), dt, noise.dxi);
                    stepper.step(psi, dt, noise);
                    for (std::size_t k = 0; k < ck_steps.size(); ++k)
                        if (ck_steps[k] == step + 1) states[k] = psi;
                }
                block[i] = std::move(states);
            });
        }
        guard.rethrow();
        for (int i = 0; i < count; ++i)
            for (std::size_t k = 0; k < ck_steps.size(); ++k)
                accumulate_projector(acc[k], block[i][k]);
    }

    std::vector<oracle::DensityMatrix> out;
    out.reserve(acc.size());
    for (oracle::Dense& a : acc) out.push_back({a / double(n_traj)});
    return out;
}

} // namespace qsd3::qsd
