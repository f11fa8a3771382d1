#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bstt/regression.hpp"
#include "bstt/sample_set.hpp"
#include "bstt/spaces.hpp"

namespace bstt {

struct HeatSystem {
    Eigen::MatrixXd a;       // Neumann second-difference Laplacian, scaled by 1/h^2
    Eigen::VectorXd b_ctrl;  // indicator of grid nodes with |x| <= 0.4
    Eigen::MatrixXd q;       // h * identity
    double h = 0.0;
};

/// Finite-difference heat equation on [-1,1] with d grid nodes, h = 2/(d-1),
/// Neumann boundaries via ghost nodes.
HeatSystem discretize_heat_equation(int d);

/// Solves A^T P + P A - P B (1/lambda) B^T P + Q = 0 by Newton-Kleinman
/// iteration from a stabilizing gain; stops when the residual falls below
/// 1e-10 * ||Q||_F. Throws after 100 steps without convergence.
Eigen::MatrixXd solve_are(const Eigen::MatrixXd& a, const Eigen::VectorXd& b_ctrl,
                          const Eigen::MatrixXd& q, double lambda);

/// Lyapunov solve A^T P + P A + C = 0 via the Kronecker system (small d).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c);

/// Empirical quantile with linear interpolation between order statistics
/// (position 1 + (n-1)q).
double empirical_quantile(std::vector<double> values, double q);

struct ExperimentConfig {
    std::string problem;  // riccati | gaussian
    std::vector<SpaceDescriptor> spaces;
    std::vector<int> sample_sizes;  // strictly increasing
    int trials = 20;
    std::uint64_t seed = 0;
    int test_samples = 1000;
    FitOptions options;
    double control_penalty = 1.0;  // riccati only
    bool timing = false;           // wall-clock in records; off keeps output byte-reproducible
    std::string dump_prefix;       // when set, train/test CSVs are written per trial
};

struct TrialRecord {
    int sample_size = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::string space;
    double error = 0.0;  // NaN when the trial's solver failed (emitted as null)
    int sweeps = 0;
    double seconds = 0.0;
    std::string failure;  // solver error message; empty on success
};

struct QuantileRow {
    std::string space;
    int sample_size = 0;
    double q15 = 0.0, median = 0.0, q85 = 0.0;
};

struct StudyResult {
    std::vector<TrialRecord> records;
    std::vector<QuantileRow> quantiles;
    std::vector<std::pair<std::string, std::int64_t>> dof_lines;
};

/// Deterministic per-trial seed: splitmix64 chain over (base, space, M-index, trial).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t space_index, std::uint64_t m_index,
                          std::uint64_t trial_index);

StudyResult run_riccati_study(const ExperimentConfig& cfg);
StudyResult run_gaussian_study(const ExperimentConfig& cfg);

/// Fits one space to externally supplied samples; test error against the held
/// out set when one is given.
struct IngestFitResult {
    double train_residual = 0.0;
    double test_error = -1.0;
    FitReport report;
};
IngestFitResult ingest_fit(const SampleSet& train, const std::optional<SampleSet>& test,
                           const SpaceDescriptor& space, const FitOptions& options);

/// Writes <prefix>.jsonl (one record per trial) and <prefix>.csv with rows
/// (space, M, q15, median, q85).
void emit_study(const StudyResult& result, const std::string& prefix);

std::vector<TrialRecord> read_records_jsonl(const std::string& path);
StudyResult aggregate_records(std::vector<TrialRecord> records);

}  // namespace bstt
