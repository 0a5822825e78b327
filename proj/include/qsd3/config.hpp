#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qsd3::cli {

enum class Mode { Classical, Qsd, Ensemble, Oracle, Compare, Lyapunov };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

// One experiment definition, parsed from a JSON config file. Defaults follow
// the documented table: beta 0.25 (1.0 for the purely classical modes),
// kappa 0.1 per mode, n_max 24, t_end 20, dt and output_stride derived when
// left at 0.
struct RunConfig {
    Mode mode = Mode::Qsd;
    double beta = 0.25;
    std::array<double, 3> kappa{0.1, 0.1, 0.1};
    int n_max = 24;
    double dt = 0.0;        // 0: step-size rule (quantum) / 1e-3 (classical)
    double t_end = 20.0;
    int output_stride = 0;  // 0: derived
    std::uint64_t seed = 1;
    std::vector<int> measured_modes{1, 2, 3};
    int n_traj = 1;
    std::string output_path; // basename for emitted files; default: mode name
    std::vector<double> checkpoint_times;
    bool save_density = false;
    bool semi_implicit = false;
    double renorm_interval = 1.0; // lyapunov mode

    bool operator==(const RunConfig&) const = default;
};

// Strict parser: unknown keys are collected and rejected in one error;
// physical violations (beta <= 0, kappa < 0, n_max < 2, ...) raise
// ValidationError with the offending field named.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);

// Emits every effective field, so parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

} // namespace qsd3::cli
