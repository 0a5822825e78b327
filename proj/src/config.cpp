#include "qsd3/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qsd3/errors.hpp"

namespace qsd3::cli {

using nlohmann::json;

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Classical: return "classical";
        case Mode::Qsd: return "qsd";
        case Mode::Ensemble: return "ensemble";
        case Mode::Oracle: return "oracle";
        case Mode::Compare: return "compare";
        case Mode::Lyapunov: return "lyapunov";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    if (s == "classical") return Mode::Classical;
    if (s == "qsd") return Mode::Qsd;
    if (s == "ensemble") return Mode::Ensemble;
    if (s == "oracle") return Mode::Oracle;
    if (s == "compare") return Mode::Compare;
    if (s == "lyapunov") return Mode::Lyapunov;
    throw ValidationError("unknown mode '" + s +
                          "' (expected classical|qsd|ensemble|oracle|compare|lyapunov)");
}

namespace {

const std::set<std::string> kKnownKeys = {
    "mode",        "beta",        "kappa",       "n_max",
    "dt",          "t_end",       "output_stride", "seed",
    "measured_modes", "n_traj",   "output_path", "checkpoint_times",
    "save_density", "semi_implicit", "renorm_interval"};

void reject_unknown_keys(const json& j) {
    std::vector<std::string> unknown;
    for (const auto& [key, _] : j.items())
        if (!kKnownKeys.count(key)) unknown.push_back(key);
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const std::string& k : unknown) msg += " '" + k + "'";
        throw ValidationError(msg);
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config field '" + key + "' has the wrong type");
    }
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    reject_unknown_keys(j);
    if (!j.contains("mode")) throw ValidationError("config requires 'mode'");

    RunConfig c;
    c.mode = mode_from_string(get_or<std::string>(j, "mode", ""));

    const bool classical_mode = c.mode == Mode::Classical || c.mode == Mode::Lyapunov;
    c.beta = get_or<double>(j, "beta", classical_mode ? 1.0 : 0.25);
    if (!(c.beta > 0.0)) throw ValidationError("'beta' must be > 0");

    if (j.contains("kappa")) {
        const json& k = j.at("kappa");
        if (k.is_number()) {
            c.kappa.fill(k.get<double>());
        } else if (k.is_array() && k.size() == 3) {
            for (int i = 0; i < 3; ++i) c.kappa[i] = k.at(i).get<double>();
        } else {
            throw ValidationError("'kappa' must be a number or an array of 3 numbers");
        }
    }
    for (double k : c.kappa)
        if (k < 0.0) throw ValidationError("'kappa' entries must be >= 0");

    c.n_max = get_or<int>(j, "n_max", 24);
    if (c.n_max < 2) throw ValidationError("'n_max' must be >= 2");

    c.dt = get_or<double>(j, "dt", 0.0);
    if (c.dt < 0.0) throw ValidationError("'dt' must be >= 0 (0 selects the default)");
    if (c.dt == 0.0 && classical_mode) c.dt = 1e-3;

    c.t_end = get_or<double>(j, "t_end", 20.0);
    if (!(c.t_end > 0.0)) throw ValidationError("'t_end' must be > 0");

    c.output_stride = get_or<int>(j, "output_stride", 0);
    if (c.output_stride < 0) throw ValidationError("'output_stride' must be >= 0");

    c.seed = get_or<std::uint64_t>(j, "seed", 1);

    if (j.contains("measured_modes")) {
        c.measured_modes = get_or<std::vector<int>>(j, "measured_modes", {});
        for (int m : c.measured_modes)
            if (m < 1 || m > 3)
                throw ValidationError("'measured_modes' entries must be in 1..3");
        std::sort(c.measured_modes.begin(), c.measured_modes.end());
        c.measured_modes.erase(
            std::unique(c.measured_modes.begin(), c.measured_modes.end()),
            c.measured_modes.end());
    }

    c.n_traj = get_or<int>(j, "n_traj", 1);
    if (c.mode == Mode::Ensemble && !j.contains("n_traj"))
        throw ValidationError("mode 'ensemble' requires 'n_traj'");
    if (c.n_traj < 1) throw ValidationError("'n_traj' must be >= 1");

    c.output_path = get_or<std::string>(j, "output_path", to_string(c.mode));
    if (c.output_path.empty()) throw ValidationError("'output_path' must not be empty");

    c.checkpoint_times = get_or<std::vector<double>>(j, "checkpoint_times", {});
    for (double t : c.checkpoint_times)
        if (t < 0.0 || t > c.t_end)
            throw ValidationError("'checkpoint_times' must lie in [0, t_end]");
    std::sort(c.checkpoint_times.begin(), c.checkpoint_times.end());

    c.save_density = get_or<bool>(j, "save_density", false);
    if (c.save_density && c.mode != Mode::Ensemble && c.mode != Mode::Oracle)
        throw ValidationError("'save_density' applies to ensemble and oracle modes only");
    if (c.save_density && c.checkpoint_times.empty())
        throw ValidationError("'save_density' requires 'checkpoint_times'");

    c.semi_implicit = get_or<bool>(j, "semi_implicit", false);

    c.renorm_interval = get_or<double>(j, "renorm_interval", 1.0);
    if (!(c.renorm_interval > 0.0)) throw ValidationError("'renorm_interval' must be > 0");

    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    json j;
    j["mode"] = to_string(c.mode);
    j["beta"] = c.beta;
    j["kappa"] = c.kappa;
    j["n_max"] = c.n_max;
    j["dt"] = c.dt;
    j["t_end"] = c.t_end;
    j["output_stride"] = c.output_stride;
    j["seed"] = c.seed;
    j["measured_modes"] = c.measured_modes;
    j["n_traj"] = c.n_traj;
    j["output_path"] = c.output_path;
    j["checkpoint_times"] = c.checkpoint_times;
    j["save_density"] = c.save_density;
    j["semi_implicit"] = c.semi_implicit;
    j["renorm_interval"] = c.renorm_interval;
    return j.dump(2);
}

} // namespace qsd3::cli
