#include "qsd3/classical.hpp"

#include <cmath>
#include <string>

#include "qsd3/errors.hpp"

namespace qsd3::classical {

namespace {

bool finite(const ClassicalState& s) {
    for (int i = 0; i < 3; ++i)
        if (!std::isfinite(s.q[i]) || !std::isfinite(s.p[i])) return false;
    return true;
}

ClassicalState axpy(const ClassicalState& s, double h, const ClassicalState& d) {
    ClassicalState out;
    for (int i = 0; i < 3; ++i) {
        out.q[i] = s.q[i] + h * d.q[i];
        out.p[i] = s.p[i] + h * d.p[i];
    }
    return out;
}

ClassicalState rk4_step(const ClassicalState& s, double beta, double dt) {
    const ClassicalState k1 = rhs(s, beta);
    const ClassicalState k2 = rhs(axpy(s, 0.5 * dt, k1), beta);
    const ClassicalState k3 = rhs(axpy(s, 0.5 * dt, k2), beta);
    const ClassicalState k4 = rhs(axpy(s, dt, k3), beta);
    ClassicalState out;
    for (int i = 0; i < 3; ++i) {
        out.q[i] = s.q[i] + dt / 6.0 * (k1.q[i] + 2.0 * k2.q[i] + 2.0 * k3.q[i] + k4.q[i]);
        out.p[i] = s.p[i] + dt / 6.0 * (k1.p[i] + 2.0 * k2.p[i] + 2.0 * k3.p[i] + k4.p[i]);
    }
    return out;
}

// Tangent flow: joint state (s, v) where v evolves with the Jacobian of rhs
// evaluated along s. Integrated with one RK4 over the 12-dim joint system so
// the deviation vector sees the correct intermediate states.
struct Joint {
    ClassicalState s;
    ClassicalState v;
};

Joint joint_rhs(const Joint& x, double beta) {
    Joint d;
    d.s = rhs(x.s, beta);
    const double b2 = beta * beta;
    for (int i = 0; i < 3; ++i) {
        d.v.q[i] = x.v.p[i];
        double sum_other = 0.0;
        double cross = 0.0;
        for (int j = 0; j < 3; ++j) {
            if (j == i) continue;
            sum_other += x.s.q[j] * x.s.q[j];
            cross += 2.0 * x.s.q[i] * x.s.q[j] * x.v.q[j];
        }
        d.v.p[i] = -b2 * ((3.0 * x.s.q[i] * x.s.q[i] / 8.0 + sum_other) * x.v.q[i] + cross);
    }
    return d;
}

Joint joint_axpy(const Joint& x, double h, const Joint& d) {
    return {axpy(x.s, h, d.s), axpy(x.v, h, d.v)};
}

Joint joint_rk4(const Joint& x, double beta, double dt) {
    const Joint k1 = joint_rhs(x, beta);
    const Joint k2 = joint_rhs(joint_axpy(x, 0.5 * dt, k1), beta);
    const Joint k3 = joint_rhs(joint_axpy(x, 0.5 * dt, k2), beta);
    const Joint k4 = joint_rhs(joint_axpy(x, dt, k3), beta);
    Joint out;
    for (int i = 0; i < 3; ++i) {
        out.s.q[i] = x.s.q[i] + dt / 6.0 * (k1.s.q[i] + 2 * k2.s.q[i] + 2 * k3.s.q[i] + k4.s.q[i]);
        out.s.p[i] = x.s.p[i] + dt / 6.0 * (k1.s.p[i] + 2 * k2.s.p[i] + 2 * k3.s.p[i] + k4.s.p[i]);
        out.v.q[i] = x.v.q[i] + dt / 6.0 * (k1.v.q[i] + 2 * k2.v.q[i] + 2 * k3.v.q[i] + k4.v.q[i]);
        out.v.p[i] = x.v.p[i] + dt / 6.0 * (k1.v.p[i] + 2 * k2.v.p[i] + 2 * k3.v.p[i] + k4.v.p[i]);
    }
    return out;
}

double tangent_norm(const ClassicalState& v) {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) acc += v.q[i] * v.q[i] + v.p[i] * v.p[i];
    return std::sqrt(acc);
}

} // namespace

double phase_point_energy(const std::array<double, 3>& q, const std::array<double, 3>& p,
                          double beta) {
    const double b2 = beta * beta;
    double e = 0.0;
    for (int i = 0; i < 3; ++i)
        e += 0.5 * p[i] * p[i] + b2 / 32.0 * q[i] * q[i] * q[i] * q[i];
    e += b2 / 2.0 *
         (q[0] * q[0] * q[1] * q[1] + q[1] * q[1] * q[2] * q[2] + q[0] * q[0] * q[2] * q[2]);
    return e;
}

ClassicalState rhs(const ClassicalState& s, double beta) {
    ClassicalState d;
    const double b2 = beta * beta;
    for (int i = 0; i < 3; ++i) {
        d.q[i] = s.p[i];
        double sum_other = 0.0;
        for (int j = 0; j < 3; ++j)
            if (j != i) sum_other += s.q[j] * s.q[j];
        d.p[i] = -b2 * (s.q[i] * s.q[i] * s.q[i] / 8.0 + s.q[i] * sum_other);
    }
    return d;
}

ClassicalTrajectory integrate(const ClassicalState& s0, double beta, double t_end, double dt,
                              int output_stride) {
    if (dt <= 0.0 || t_end <= 0.0) throw ValidationError("dt and t_end must be > 0");
    if (output_stride < 1) throw ValidationError("output_stride must be >= 1");
    const long nsteps = std::lround(t_end / dt);
    ClassicalTrajectory traj;
    ClassicalState s = s0;
    traj.times.push_back(0.0);
    traj.states.push_back(s);
    traj.energies.push_back(phase_point_energy(s.q, s.p, beta));
    for (long step = 1; step <= nsteps; ++step) {
        s = rk4_step(s, beta, dt);
        if (!finite(s))
            throw NumericalBlowupError("classical state diverged at t = " +
                                           std::to_string(step * dt),
                                       step * dt, step);
        if (step % output_stride == 0 || step == nsteps) {
            traj.times.push_back(step * dt);
            traj.states.push_back(s);
            traj.energies.push_back(phase_point_energy(s.q, s.p, beta));
        }
    }
    const double e0 = traj.energies.front();
    double worst = 0.0;
    for (double e : traj.energies) worst = std::max(worst, std::abs(e - e0));
    traj.rel_energy_drift = e0 != 0.0 ? worst / std::abs(e0) : worst;
    return traj;
}

LyapunovResult largest_lyapunov(const ClassicalState& s0, double beta, double t_end, double dt,
                                double renorm_interval) {
    if (dt <= 0.0 || t_end <= 0.0 || renorm_interval <= 0.0)
        throw ValidationError("dt, t_end, renorm_interval must be > 0");
    Joint x;
    x.s = s0;
    // Deterministic unit deviation with weight on every coordinate.
    for (int i = 0; i < 3; ++i) {
        x.v.q[i] = 1.0;
        x.v.p[i] = 1.0;
    }
    const double vn0 = tangent_norm(x.v);
    for (int i = 0; i < 3; ++i) {
        x.v.q[i] /= vn0;
        x.v.p[i] /= vn0;
    }
    const long steps_per_block = std::max(1L, std::lround(renorm_interval / dt));
    const long nblocks = std::max(1L, std::lround(t_end / (steps_per_block * dt)));
    LyapunovResult res;
    double log_sum = 0.0;
    for (long b = 0; b < nblocks; ++b) {
        for (long k = 0; k < steps_per_block; ++k) {
            x = joint_rk4(x, beta, dt);
            if (!finite(x.s))
                throw NumericalBlowupError("trajectory diverged during Lyapunov run",
                                           (b * steps_per_block + k + 1) * dt,
                                           b * steps_per_block + k + 1);
        }
        const double g = tangent_norm(x.v);
        // A tangent collapsed to zero (exact fixed point) contributes nothing.
        if (g > 0.0) {
            log_sum += std::log(g);
            for (int i = 0; i < 3; ++i) {
                x.v.q[i] /= g;
                x.v.p[i] /= g;
            }
        }
        const double t = (b + 1) * steps_per_block * dt;
        res.times.push_back(t);
        res.running.push_back(log_sum / t);
    }
    res.lambda = res.running.back();
    return res;
}

ClassicalState reference_initial_state(double beta) {
    if (beta <= 0.0) throw ValidationError("beta must be > 0");
    ClassicalState s;
    s.q = {-0.2 / beta, 0.05 / beta, 0.15 / beta};
    return s;
}

} // namespace qsd3::classical
