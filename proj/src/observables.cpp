#include "qsd3/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qsd3/errors.hpp"
#include "qsd3/kernels.hpp"
#include "qsd3/qsd.hpp"

namespace qsd3::observables {

cplx expectation(const QuantumState& psi, const SparseMatrix& a) {
    if (psi.dim() != a.cols || !a.square())
        throw InvalidDimensionError("expectation: dimension mismatch");
    std::vector<cplx> work(psi.dim());
    kernels::spmv(a, psi.amp, work);
    return kernels::dot(psi.amp, work);
}

double expectation_real(const QuantumState& psi, const SparseMatrix& a) {
    const cplx v = expectation(psi, a);
    if (std::abs(v.imag()) > 1e-10)
        throw ValidationError("expectation of claimed-Hermitian operator has imaginary part " +
                              std::to_string(v.imag()));
    return v.real();
}

double g2(double mean_n, double mean_n2, double floor) {
    if (mean_n <= floor) return std::numeric_limits<double>::quiet_NaN();
    return (mean_n2 - mean_n) / (mean_n * mean_n);
}

double classicalized_energy(const ObservableSet& obs, double beta) {
    return classical::phase_point_energy(
        {obs.modes[0].q, obs.modes[1].q, obs.modes[2].q},
        {obs.modes[0].p, obs.modes[1].p, obs.modes[2].p}, beta);
}

ThreeModeObservables::ThreeModeObservables(int n_max, double beta)
    : n_max_(n_max), beta_(beta) {
    ModeDim check(n_max);
    const SparseMatrix q = fock::position_op(n_max);
    const SparseMatrix p = fock::momentum_op(n_max);
    const SparseMatrix n = fock::number_op(n_max);
    const SparseMatrix q2 = matmul(q, q);
    const SparseMatrix p2 = matmul(p, p);
    const SparseMatrix n2 = matmul(n, n);
    for (int m = 1; m <= 3; ++m) {
        q_[m - 1] = fock::embed(q, m, n_max);
        p_[m - 1] = fock::embed(p, m, n_max);
        q2_[m - 1] = fock::embed(q2, m, n_max);
        p2_[m - 1] = fock::embed(p2, m, n_max);
        n_[m - 1] = fock::embed(n, m, n_max);
        n2_[m - 1] = fock::embed(n2, m, n_max);
    }
}

ObservableSet ThreeModeObservables::compute(const QuantumState& psi) const {
    const int dim = n_max_ * n_max_ * n_max_;
    if (psi.dim() != dim) throw InvalidDimensionError("state is not three-mode with this n_max");
    ObservableSet out;
    std::vector<cplx> work(dim);
    auto real_exp = [&](const SparseMatrix& a) {
        kernels::spmv(a, psi.amp, work);
        return kernels::dot(psi.amp, work).real();
    };
    for (int m = 0; m < 3; ++m) {
        ModeMoments& mm = out.modes[m];
        mm.q = real_exp(q_[m]);
        mm.p = real_exp(p_[m]);
        mm.q2 = real_exp(q2_[m]);
        mm.p2 = real_exp(p2_[m]);
        mm.n = real_exp(n_[m]);
        mm.n2 = real_exp(n2_[m]);
        out.delta_q[m] = std::sqrt(std::max(mm.q2 - mm.q * mm.q, 0.0));
        out.delta_p[m] = std::sqrt(std::max(mm.p2 - mm.p * mm.p, 0.0));
        out.g2[m] = observables::g2(mm.n, mm.n2);
    }
    // Per-mode population of the two highest Fock levels.
    const int n2_floor = n_max_ - 2;
    std::array<double, 3> leak{0.0, 0.0, 0.0};
    for (int i = 0; i < dim; ++i) {
        const double w = std::norm(psi.amp[i]);
        const int i3 = i % n_max_;
        const int i2 = (i / n_max_) % n_max_;
        const int i1 = i / (n_max_ * n_max_);
        if (i1 >= n2_floor) leak[0] += w;
        if (i2 >= n2_floor) leak[1] += w;
        if (i3 >= n2_floor) leak[2] += w;
    }
    out.leakage = leak;
    out.energy = classicalized_energy(out, beta_);
    return out;
}

// --- divergence ---------------------------------------------------------------

double DivergenceReport::first_crossing(double threshold) const {
    for (std::size_t i = 0; i < times.size(); ++i)
        if (rms[i] >= threshold) return times[i];
    return std::numeric_limits<double>::infinity();
}

double cubic_interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) throw ValidationError("cubic_interp needs >= 2 samples");
    if (x < xs.front() - 1e-12 || x > xs.back() + 1e-12)
        throw ValidationError("cubic_interp: query outside sample range");
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = it == xs.begin() ? 0 : std::size_t(it - xs.begin()) - 1;
    if (i >= n - 1) i = n - 2;
    const double h = xs[i + 1] - xs[i];
    const double u = std::clamp((x - xs[i]) / h, 0.0, 1.0);
    // Finite-difference slopes, one-sided at the ends.
    auto slope = [&](std::size_t k) {
        if (k == 0) return (ys[1] - ys[0]) / (xs[1] - xs[0]);
        if (k == n - 1) return (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return (ys[k + 1] - ys[k - 1]) / (xs[k + 1] - xs[k - 1]);
    };
    const double m0 = slope(i) * h, m1 = slope(i + 1) * h;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * ys[i] + (u3 - 2 * u2 + u) * m0 +
           (-2 * u3 + 3 * u2) * ys[i + 1] + (u3 - u2) * m1;
}

DivergenceReport divergence(const classical::ClassicalTrajectory& scaled_classical,
                            const qsd::TrajectoryRecord& quantum, double beta) {
    if (scaled_classical.times.empty() || quantum.times.empty())
        throw ValidationError("divergence: empty trajectory");
    if (quantum.times.front() < scaled_classical.times.front() - 1e-9 ||
        quantum.times.back() > scaled_classical.times.back() + 1e-9)
        throw ValidationError("divergence: quantum record extends outside the classical range");

    const std::size_t nc = scaled_classical.times.size();
    std::array<std::vector<double>, 3> cq, cp;
    for (int m = 0; m < 3; ++m) {
        cq[m].resize(nc);
        cp[m].resize(nc);
        for (std::size_t k = 0; k < nc; ++k) {
            cq[m][k] = scaled_classical.states[k].q[m];
            cp[m][k] = scaled_classical.states[k].p[m];
        }
    }

    DivergenceReport rep;
    rep.log_time_ln = std::log(1.0 / beta);
    rep.log_time_log10 = std::log10(1.0 / beta);
    rep.times = quantum.times;
    rep.rms.resize(quantum.times.size());
    for (std::size_t k = 0; k < quantum.times.size(); ++k) {
        const double t = quantum.times[k];
        double acc = 0.0;
        for (int m = 0; m < 3; ++m) {
            const double eq = beta * quantum.mean_q[k][m] -
                              cubic_interp(scaled_classical.times, cq[m], t);
            const double ep = beta * quantum.mean_p[k][m] -
                              cubic_interp(scaled_classical.times, cp[m], t);
            acc += eq * eq + ep * ep;
        }
        rep.rms[k] = std::sqrt(acc / 3.0);
    }
    return rep;
}

} // namespace qsd3::observables
