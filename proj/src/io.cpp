#include "qsd3/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "qsd3/errors.hpp"

namespace qsd3::io {

const char* kClassicalHeader = "t,q1,p1,q2,p2,q3,p3,energy";
const char* kQuantumHeader =
    "t,q1,p1,dq1,dp1,n1,g2_1,q2,p2,dq2,dp2,n2,g2_2,q3,p3,dq3,dp3,n3,g2_3,energy,norm,leakage";
const char* kDivergenceHeader =
    "t,rms_error,beta_q1,cl_q1,beta_p1,cl_p1,beta_q2,cl_q2,beta_p2,cl_p2,beta_q3,cl_q3,beta_p3,cl_p3";
const char* kCrossingsHeader = "threshold,first_crossing_time";
const char* kLyapunovHeader = "t,running_lambda";
const char* kOracleHeader = "t,trace,purity,q,p,n";

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw ValidationError("cannot open output file: " + path);
    return out;
}

void write_row(std::ofstream& out, const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) out << ',';
        out << format_double(vals[i]);
    }
    out << '\n';
}

} // namespace

void write_classical_csv(const std::string& path, const classical::ClassicalTrajectory& traj) {
    std::ofstream out = open_out(path);
    out << kClassicalHeader << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const classical::ClassicalState& s = traj.states[k];
        write_row(out, {traj.times[k], s.q[0], s.p[0], s.q[1], s.p[1], s.q[2], s.p[2],
                        traj.energies[k]});
    }
}

void write_quantum_csv(const std::string& path, const qsd::TrajectoryRecord& rec) {
    std::ofstream out = open_out(path);
    out << kQuantumHeader << '\n';
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
        std::vector<double> row;
        row.push_back(rec.times[k]);
        for (int m = 0; m < 3; ++m) {
            row.push_back(rec.mean_q[k][m]);
            row.push_back(rec.mean_p[k][m]);
            row.push_back(rec.delta_q[k][m]);
            row.push_back(rec.delta_p[k][m]);
            row.push_back(rec.mean_n[k][m]);
            row.push_back(rec.g2[k][m]);
        }
        row.push_back(rec.energy[k]);
        row.push_back(rec.norm_before[k]);
        row.push_back(std::max({rec.leakage[k][0], rec.leakage[k][1], rec.leakage[k][2]}));
        write_row(out, row);
    }
}

qsd::TrajectoryRecord mean_record(const std::vector<qsd::TrajectoryRecord>& records) {
    if (records.empty()) throw ValidationError("mean_record: no trajectories");
    qsd::TrajectoryRecord mean = records.front();
    const std::size_t rows = mean.times.size();
    for (const qsd::TrajectoryRecord& r : records) {
        if (r.times.size() != rows)
            throw ValidationError("mean_record: trajectories have different grids");
        mean.norm_valid = mean.norm_valid && r.norm_valid;
        mean.truncation_suspect = mean.truncation_suspect || r.truncation_suspect;
        mean.worst_norm_dev = std::max(mean.worst_norm_dev, r.worst_norm_dev);
        mean.worst_leakage = std::max(mean.worst_leakage, r.worst_leakage);
    }
    const double inv = 1.0 / double(records.size());
    for (std::size_t k = 0; k < rows; ++k) {
        std::array<double, 3> q{}, p{}, dq{}, dp{}, n{}, g2v{}, leak{};
        double e = 0.0, nb = 0.0;
        for (const qsd::TrajectoryRecord& r : records) {
            for (int m = 0; m < 3; ++m) {
                q[m] += r.mean_q[k][m];
                p[m] += r.mean_p[k][m];
                dq[m] += r.delta_q[k][m];
                dp[m] += r.delta_p[k][m];
                n[m] += r.mean_n[k][m];
                g2v[m] += r.g2[k][m]; // NaN propagates by design
                leak[m] += r.leakage[k][m];
            }
            e += r.energy[k];
            nb += r.norm_before[k];
        }
        for (int m = 0; m < 3; ++m) {
            mean.mean_q[k][m] = q[m] * inv;
            mean.mean_p[k][m] = p[m] * inv;
            mean.delta_q[k][m] = dq[m] * inv;
            mean.delta_p[k][m] = dp[m] * inv;
            mean.mean_n[k][m] = n[m] * inv;
            mean.g2[k][m] = g2v[m] * inv;
            mean.leakage[k][m] = leak[m] * inv;
        }
        mean.energy[k] = e * inv;
        mean.norm_before[k] = nb * inv;
    }
    return mean;
}

void write_divergence_csv(const std::string& path, const observables::DivergenceReport& rep,
                          const classical::ClassicalTrajectory& scaled_classical,
                          const qsd::TrajectoryRecord& quantum, double beta) {
    std::ofstream out = open_out(path);
    out << kDivergenceHeader << '\n';
    std::array<std::vector<double>, 3> cq, cp;
    for (int m = 0; m < 3; ++m) {
        cq[m].resize(scaled_classical.times.size());
        cp[m].resize(scaled_classical.times.size());
        for (std::size_t k = 0; k < scaled_classical.times.size(); ++k) {
            cq[m][k] = scaled_classical.states[k].q[m];
            cp[m][k] = scaled_classical.states[k].p[m];
        }
    }
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        const double t = rep.times[k];
        std::vector<double> row{t, rep.rms[k]};
        for (int m = 0; m < 3; ++m) {
            row.push_back(beta * quantum.mean_q[k][m]);
            row.push_back(observables::cubic_interp(scaled_classical.times, cq[m], t));
            row.push_back(beta * quantum.mean_p[k][m]);
            row.push_back(observables::cubic_interp(scaled_classical.times, cp[m], t));
        }
        write_row(out, row);
    }
}

void write_crossings_csv(const std::string& path, const observables::DivergenceReport& rep,
                         const std::vector<double>& thresholds) {
    std::ofstream out = open_out(path);
    out << kCrossingsHeader << '\n';
    for (double th : thresholds) write_row(out, {th, rep.first_crossing(th)});
}

void write_lyapunov_csv(const std::string& path, const classical::LyapunovResult& res) {
    std::ofstream out = open_out(path);
    out << kLyapunovHeader << '\n';
    for (std::size_t k = 0; k < res.times.size(); ++k)
        write_row(out, {res.times[k], res.running[k]});
}

void write_oracle_csv(const std::string& path, const oracle::LindbladSeries& series,
                      const SparseMatrix& q, const SparseMatrix& p, const SparseMatrix& n) {
    std::ofstream out = open_out(path);
    out << kOracleHeader << '\n';
    const oracle::Dense qd = oracle::to_dense(q);
    const oracle::Dense pd = oracle::to_dense(p);
    const oracle::Dense nd = oracle::to_dense(n);
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const oracle::Dense& rho = series.states[k].rho;
        write_row(out, {series.times[k], series.states[k].trace_real(),
                        series.states[k].purity(), (rho * qd).trace().real(),
                        (rho * pd).trace().real(), (rho * nd).trace().real()});
    }
}

void write_density_checkpoint(const std::string& path, const oracle::DensityMatrix& rho) {
    static_assert(std::endian::native == std::endian::little,
                  "density checkpoint writer assumes a little-endian host");
    std::ofstream out = open_out(path, true);
    const std::uint64_t dim = std::uint64_t(rho.dim());
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    for (int r = 0; r < rho.dim(); ++r)
        for (int c = 0; c < rho.dim(); ++c) {
            const cplx v = rho.rho(r, c);
            const double re = v.real(), im = v.imag();
            out.write(reinterpret_cast<const char*>(&re), sizeof(re));
            out.write(reinterpret_cast<const char*>(&im), sizeof(im));
        }
    if (!out) throw ValidationError("failed writing density checkpoint: " + path);
}

oracle::DensityMatrix read_density_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open density checkpoint: " + path);
    std::uint64_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    if (!in || dim == 0 || dim > (1u << 20))
        throw ValidationError("corrupt density checkpoint header: " + path);
    oracle::DensityMatrix out{oracle::Dense::Zero(int(dim), int(dim))};
    for (std::uint64_t r = 0; r < dim; ++r)
        for (std::uint64_t c = 0; c < dim; ++c) {
            double re, im;
            in.read(reinterpret_cast<char*>(&re), sizeof(re));
            in.read(reinterpret_cast<char*>(&im), sizeof(im));
            out.rho(int(r), int(c)) = cplx{re, im};
        }
    if (!in) throw ValidationError("density checkpoint truncated: " + path);
    return out;
}

} // namespace qsd3::io
