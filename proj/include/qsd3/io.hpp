#pragma once

#include <string>
#include <vector>

#include "qsd3/classical.hpp"
#include "qsd3/config.hpp"
#include "qsd3/observables.hpp"
#include "qsd3/oracle.hpp"
#include "qsd3/qsd.hpp"

namespace qsd3::io {

// Column orders are fixed and guarded by golden-header tests.
extern const char* kClassicalHeader;
extern const char* kQuantumHeader;
extern const char* kDivergenceHeader;
extern const char* kCrossingsHeader;
extern const char* kLyapunovHeader;
extern const char* kOracleHeader;

std::string format_double(double v); // %.17g; nan / inf spelled out

void write_classical_csv(const std::string& path, const classical::ClassicalTrajectory& traj);
void write_quantum_csv(const std::string& path, const qsd::TrajectoryRecord& rec);

// Element-wise mean over trajectory records (all on the same time grid),
// computed in index order so the bytes do not depend on scheduling.
qsd::TrajectoryRecord mean_record(const std::vector<qsd::TrajectoryRecord>& records);

void write_divergence_csv(const std::string& path, const observables::DivergenceReport& rep,
                          const classical::ClassicalTrajectory& scaled_classical,
                          const qsd::TrajectoryRecord& quantum, double beta);
void write_crossings_csv(const std::string& path, const observables::DivergenceReport& rep,
                         const std::vector<double>& thresholds);
void write_lyapunov_csv(const std::string& path, const classical::LyapunovResult& res);
void write_oracle_csv(const std::string& path, const oracle::LindbladSeries& series,
                      const SparseMatrix& q, const SparseMatrix& p, const SparseMatrix& n);

// Binary density checkpoint: little-endian uint64 dimension, then dim*dim
// row-major entries as (re, im) little-endian float64 pairs.
void write_density_checkpoint(const std::string& path, const oracle::DensityMatrix& rho);
oracle::DensityMatrix read_density_checkpoint(const std::string& path);

} // namespace qsd3::io
