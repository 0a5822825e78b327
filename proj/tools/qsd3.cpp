// Experiment runner: parses a JSON run configuration, dispatches the
// classical / stochastic / master-equation jobs, and emits CSV data plus a
// run manifest (written last, so interrupted runs are detectably incomplete).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "qsd3/classical.hpp"
#include "qsd3/config.hpp"
#include "qsd3/errors.hpp"
#include "qsd3/fock.hpp"
#include "qsd3/io.hpp"
#include "qsd3/observables.hpp"
#include "qsd3/oracle.hpp"
#include "qsd3/qsd.hpp"
#include "qsd3/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qsd3;

namespace {

constexpr int kOracleModeDimCap = 256;
const std::vector<double> kCrossingThresholds{0.05, 0.1, 0.2};

struct RunContext {
    cli::RunConfig config;
    fs::path out_dir;
    std::vector<std::string> outputs;
    json summary;
    bool norm_valid = true;
    bool truncation_suspect = false;
    bool closed_system = false;

    fs::path out(const std::string& suffix) {
        const fs::path p = out_dir / (config.output_path + suffix);
        outputs.push_back(p.filename().string());
        return p;
    }
    bool flags_pass() const { return norm_valid && !truncation_suspect; }
};

qsd::SystemParams to_system_params(const cli::RunConfig& c) {
    qsd::SystemParams p;
    p.beta = c.beta;
    p.kappa = c.kappa;
    p.mode_dim = ModeDim(c.n_max);
    p.dt = c.dt;
    p.t_end = c.t_end;
    p.output_stride = c.output_stride;
    p.seed = c.seed;
    return p;
}

void absorb_record_flags(RunContext& ctx, const qsd::TrajectoryRecord& rec) {
    ctx.norm_valid = ctx.norm_valid && rec.norm_valid;
    ctx.truncation_suspect = ctx.truncation_suspect || rec.truncation_suspect;
    ctx.closed_system = rec.closed_system;
    ctx.summary["worst_norm_dev"] = rec.worst_norm_dev;
    ctx.summary["worst_leakage"] = rec.worst_leakage;
    ctx.summary["dt_used"] = rec.dt_used;
    ctx.summary["n_steps"] = rec.n_steps;
}

// Classical reference in the scaled frame: beta * trajectory(beta, ICs/beta)
// equals trajectory(1, scaled ICs) exactly, so integrate at beta = 1.
classical::ClassicalTrajectory scaled_classical_reference(double t_end, double dt, int stride) {
    const classical::ClassicalState s0 = classical::reference_initial_state(1.0);
    return classical::integrate(s0, 1.0, t_end, dt, stride);
}

void run_classical(RunContext& ctx) {
    const cli::RunConfig& c = ctx.config;
    const int stride = c.output_stride > 0 ? c.output_stride
                                           : std::max(1, int(std::lround(0.02 / c.dt)));
    const classical::ClassicalTrajectory traj = classical::integrate(
        classical::reference_initial_state(c.beta), c.beta, c.t_end, c.dt, stride);
    io::write_classical_csv(ctx.out(".csv").string(), traj);
    ctx.summary["rel_energy_drift"] = traj.rel_energy_drift;
    ctx.summary["n_records"] = traj.times.size();
}

void run_lyapunov(RunContext& ctx) {
    const cli::RunConfig& c = ctx.config;
    const classical::LyapunovResult res = classical::largest_lyapunov(
        classical::reference_initial_state(c.beta), c.beta, c.t_end, c.dt, c.renorm_interval);
    io::write_lyapunov_csv(ctx.out(".csv").string(), res);
    ctx.summary["lambda"] = res.lambda;
    ctx.summary["renorm_interval"] = c.renorm_interval;
}

void run_qsd(RunContext& ctx) {
    const cli::RunConfig& c = ctx.config;
    const qsd::TrajectoryOutput out =
        qsd::run_trajectory(to_system_params(c), c.measured_modes, {}, c.semi_implicit);
    io::write_quantum_csv(ctx.out(".csv").string(), out.record);
    absorb_record_flags(ctx, out.record);
}

void run_ensemble(RunContext& ctx) {
    const cli::RunConfig& c = ctx.config;
    const qsd::EnsembleResult res =
        qsd::run_ensemble(to_system_params(c), c.measured_modes, c.n_traj, c.checkpoint_times,
                          c.save_density);
    const qsd::TrajectoryRecord mean = io::mean_record(res.trajectories);
    io::write_quantum_csv(ctx.out("_mean.csv").string(), mean);
    for (std::size_t k = 0; k < res.mean_density.size(); ++k) {
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "_rho_%03zu.bin", k);
        io::write_density_checkpoint(ctx.out(suffix).string(), res.mean_density[k]);
    }
    absorb_record_flags(ctx, mean);
    ctx.summary["n_traj"] = c.n_traj;
    if (!c.checkpoint_times.empty()) ctx.summary["checkpoint_times"] = c.checkpoint_times;
}

void run_oracle(RunContext& ctx) {
    const cli::RunConfig& c = ctx.config;
    if (c.n_max > kOracleModeDimCap)
        throw CapExceededError("oracle mode caps n_max at " +
                               std::to_string(kOracleModeDimCap));
    const SparseMatrix h = fock::single_mode_hamiltonian(c.n_max, c.beta);
    const SparseMatrix q = fock::position_op(c.n_max);
    const SparseMatrix p = fock::momentum_op(c.n_max);
    const SparseMatrix n = fock::number_op(c.n_max);
    const SparseMatrix l = scale(q, cplx{c.kappa[0], 0.0});

    const QuantumState psi0 = fock::displaced_vacuum(-0.2 / c.beta, 0.0, c.n_max);
    double dt = c.dt;
    if (dt <= 0.0) {
        const double qsq = observables::expectation_real(psi0, matmul(q, q));
        // Master-equation runs use a tenth of the stochastic step.
        dt = qsd::default_dt(qsd::operator_norm_estimate(h),
                             c.kappa[0] * c.kappa[0] * qsq) / 10.0;
    }
    const long n_steps = std::max(1L, std::lround(std::ceil(c.t_end / dt - 1e-12)));
    dt = c.t_end / double(n_steps);
    const int stride = c.output_stride > 0 ? c.output_stride
                                           : std::max(1L, std::lround(0.02 / dt));

    std::vector<double> record_times;
    for (long s = 0; s <= n_steps; s += stride) record_times.push_back(s * dt);
    std::vector<double> all_times = record_times;
    for (double t : c.checkpoint_times) all_times.push_back(std::lround(t / dt) * dt);
    std::sort(all_times.begin(), all_times.end());
    all_times.erase(std::unique(all_times.begin(), all_times.end()), all_times.end());

    const oracle::LindbladSeries series =
        oracle::integrate_lindblad(oracle::pure_state_density(psi0), oracle::to_dense(h),
                                   {oracle::to_dense(l)}, dt, all_times);
    io::write_oracle_csv(ctx.out(".csv").string(), series, q, p, n);
    if (c.save_density) {
        for (std::size_t k = 0; k < c.checkpoint_times.size(); ++k) {
            const double want = std::lround(c.checkpoint_times[k] / dt) * dt;
            for (std::size_t i = 0; i < series.times.size(); ++i) {
                if (std::abs(series.times[i] - want) < 1e-12) {
                    char suffix[32];
                    std::snprintf(suffix, sizeof(suffix), "_rho_%03zu.bin", k);
                    io::write_density_checkpoint(ctx.out(suffix).string(), series.states[i]);
                    break;
                }
            }
        }
    }
    ctx.summary["dt_used"] = dt;
    ctx.summary["final_trace"] = series.states.back().trace_real();
    ctx.summary["final_purity"] = series.states.back().purity();
}

void run_compare(RunContext& ctx) {
    const cli::RunConfig& c = ctx.config;
    const qsd::TrajectoryOutput out =
        qsd::run_trajectory(to_system_params(c), c.measured_modes, {}, c.semi_implicit);
    const classical::ClassicalTrajectory ref = scaled_classical_reference(c.t_end, 1e-3, 1);
    const observables::DivergenceReport rep = observables::divergence(ref, out.record, c.beta);

    io::write_quantum_csv(ctx.out("_quantum.csv").string(), out.record);
    // Re-sampled classical reference CSV at its own grid, thinned for size.
    const classical::ClassicalTrajectory ref_out = scaled_classical_reference(c.t_end, 1e-3, 20);
    io::write_classical_csv(ctx.out("_classical.csv").string(), ref_out);
    io::write_divergence_csv(ctx.out("_divergence.csv").string(), rep, ref, out.record, c.beta);
    io::write_crossings_csv(ctx.out("_crossings.csv").string(), rep, kCrossingThresholds);

    absorb_record_flags(ctx, out.record);
    json crossings = json::object();
    for (double th : kCrossingThresholds)
        crossings[io::format_double(th)] = rep.first_crossing(th);
    ctx.summary["first_crossing_time"] = crossings;
    ctx.summary["log_time_ln"] = rep.log_time_ln;
    ctx.summary["log_time_log10"] = rep.log_time_log10;
    ctx.summary["final_rms_error"] = rep.rms.back();
}

void write_manifest(RunContext& ctx, double wall_seconds) {
    json m;
    m["config"] = json::parse(cli::serialize_config(ctx.config));
    m["code_version"] = kVersion;
    m["seed"] = ctx.config.seed;
    m["wall_time_s"] = wall_seconds;
    m["flags"] = {{"norm_valid", ctx.norm_valid},
                  {"truncation_suspect", ctx.truncation_suspect},
                  {"closed_system", ctx.closed_system}};
    m["summary"] = ctx.summary;
    m["outputs"] = ctx.outputs;
    const fs::path path = ctx.out_dir / (ctx.config.output_path + ".manifest.json");
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write manifest: " + path.string());
    out << m.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-oscillator quantum state diffusion toolkit"};
    std::string config_path;
    std::string output_dir;
    int jobs = 0;
    std::uint64_t seed_override = 0;
    bool have_seed_override = false;

    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--output", output_dir,
                   "output directory (default: $QSD3_OUTPUT_DIR or '.')");
    app.add_option("--jobs", jobs, "worker threads for ensemble mode (0 = library default)");
    app.add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { have_seed_override = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        RunContext ctx;
        ctx.config = cli::load_config_file(config_path);
        if (have_seed_override) ctx.config.seed = seed_override;

        if (output_dir.empty()) {
            const char* env = std::getenv("QSD3_OUTPUT_DIR");
            output_dir = env && *env ? env : ".";
        }
        ctx.out_dir = output_dir;
        fs::create_directories(ctx.out_dir);

#ifdef _OPENMP
        if (jobs > 0) omp_set_num_threads(jobs);
#endif

        const auto t0 = std::chrono::steady_clock::now();
        switch (ctx.config.mode) {
            case cli::Mode::Classical: run_classical(ctx); break;
            case cli::Mode::Lyapunov: run_lyapunov(ctx); break;
            case cli::Mode::Qsd: run_qsd(ctx); break;
            case cli::Mode::Ensemble: run_ensemble(ctx); break;
            case cli::Mode::Oracle: run_oracle(ctx); break;
            case cli::Mode::Compare: run_compare(ctx); break;
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(ctx, wall);

        std::cout << "mode=" << cli::to_string(ctx.config.mode) << " wall=" << wall
                  << "s outputs=" << ctx.outputs.size()
                  << (ctx.flags_pass() ? "" : " [validity flags FAILED]") << '\n';
        return ctx.flags_pass() ? 0 : 1;
    } catch (const ValidationError& e) {
        std::cerr << json{{"error_class", e.error_class()}, {"message", e.what()}}.dump()
                  << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << json{{"error_class", e.error_class()}, {"message", e.what()}}.dump()
                  << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << json{{"error_class", "internal"}, {"message", e.what()}}.dump() << '\n';
        return 3;
    }
}
