#pragma once

#include <array>
#include <vector>

namespace qsd3::classical {

struct ClassicalState {
    std::array<double, 3> q{0.0, 0.0, 0.0};
    std::array<double, 3> p{0.0, 0.0, 0.0};
};

struct ClassicalTrajectory {
    std::vector<double> times;
    std::vector<ClassicalState> states;
    std::vector<double> energies;
    double rel_energy_drift = 0.0; // max |E(t)-E(0)| / |E(0)| over the run
};

// Energy of a phase-space point:
//   sum_i p_i^2/2 + beta^2 q_i^4/32  +  beta^2/2 sum_{pairs} q_i^2 q_j^2,
// each unordered pair counted once. Shared with the quantum observables so
// both sides evaluate the identical expression.
double phase_point_energy(const std::array<double, 3>& q, const std::array<double, 3>& p,
                          double beta);

// dq_i/dt = p_i, dp_i/dt = -beta^2 (q_i^3/8 + q_i sum_{j!=i} q_j^2).
// Note the fixed point: a mode with q_i = p_i = 0 stays at zero forever.
ClassicalState rhs(const ClassicalState& s, double beta);

// Fixed-step RK4; records state and energy every output_stride steps
// (the initial point is always recorded). Throws NumericalBlowupError with
// the offending time stamp if the state leaves the finite range.
ClassicalTrajectory integrate(const ClassicalState& s0, double beta, double t_end, double dt,
                              int output_stride = 1);

struct LyapunovResult {
    double lambda = 0.0;                // final time-averaged exponent
    std::vector<double> times;          // renormalization instants
    std::vector<double> running;        // running estimate at those instants
};

// Largest Lyapunov exponent by the tangent-space (variational) method:
// co-integrates a deviation vector with the Jacobian flow, renormalizes it
// every renorm_interval time units, and averages the log stretch factors.
LyapunovResult largest_lyapunov(const ClassicalState& s0, double beta, double t_end, double dt,
                                double renorm_interval);

// Paper-style initial condition family: q = (-0.2, 0.05, 0.15)/beta, p = 0.
ClassicalState reference_initial_state(double beta);

} // namespace qsd3::classical
