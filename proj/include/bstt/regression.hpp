#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bstt/block_sparse_tt.hpp"
#include "bstt/eval_kernels.hpp"
#include "bstt/sample_set.hpp"
#include "bstt/spaces.hpp"

#include <nlohmann/json_fwd.hpp>

namespace bstt {

struct FitOptions {
    int max_sweeps = 100;
    double tol = 1e-8;               // stop when a full sweep improves the relative residual by less
    double residual_target = 1e-14;  // stop when the relative residual falls below this
    double lambda = 0.0;             // optional ridge weight on the micro-step systems
    std::uint64_t seed = 0;
    int max_outer = 200;             // outer cycles of the alternating sum fit
    double outer_tol = 1e-3;         // outer cycle stops below this relative improvement
    bool record_microsteps = false;

    static FitOptions from_json(const nlohmann::json& j);
};
void to_json(nlohmann::json& j, const FitOptions& o);

struct FitReport {
    std::vector<double> sweep_residuals;      // relative training residual per sweep
    std::vector<double> microstep_residuals;  // filled when record_microsteps is set
    double test_error = -1.0;                 // negative when no test set was evaluated
    int sweeps = 0;
    std::string termination;  // converged | stagnation | max_sweeps
    double seconds = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;
};
void to_json(nlohmann::json& j, const FitReport& r);

/// u(x^(m)) for all samples via a left-to-right stack contraction. A model with
/// mode dimension p' <= dictionary size uses the leading p' dictionary entries.
Eigen::VectorXd evaluate(const TensorTrain& model, const SampleSet& samples);
Eigen::VectorXd evaluate(const BlockSparseTT& model, const SampleSet& samples);
/// Augmented train: the shadow mode is contracted with the all-ones vector.
Eigen::VectorXd evaluate(const AugmentedBlockSparseTT& model, const SampleSet& samples);

/// Measurement operator of component k as an M x (r_{k-1} * n_k * r_k) matrix;
/// columns follow the row-major component layout, so phi * vec(C_k) equals the
/// evaluation vector. Requires the model mixed-canonical with core at k.
Eigen::MatrixXd assemble_phi(const TensorTrain& model, const SampleSet& samples, Index k);
Eigen::MatrixXd assemble_phi(const BlockSparseTT& model, const SampleSet& samples, Index k);

struct MicroStepResult {
    DenseTensor core;       // updated component, off-mask entries exactly zero
    double residual = 0.0;  // relative training residual of the updated model
};

/// Minimum-norm least-squares update of component k restricted to the masked
/// entries. Requires the model mixed-canonical with core at k.
MicroStepResult micro_step(const TensorTrain& model, const SampleSet& samples, Index k,
                           std::span<const Triple> mask, double lambda = 0.0);

std::pair<BlockSparseTT, FitReport> fit_homogeneous(const SampleSet& samples, int d, int g,
                                                    int rho_max, const FitOptions& options);

/// Warm-started variant used by the alternating sum fit; targets override the
/// sample targets.
FitReport refit_homogeneous(BlockSparseTT& model, const SampleSet& samples,
                            const Eigen::VectorXd& targets, const FitOptions& options);

std::pair<std::vector<BlockSparseTT>, FitReport> fit_sum(const SampleSet& samples, int d, int g,
                                                         int rho_max, const FitOptions& options);

std::pair<AugmentedBlockSparseTT, FitReport> fit_augmented(const SampleSet& samples, int d, int g,
                                                           int rho_max, const FitOptions& options);

/// Plain ALS on a dense rank-capped train (ranks min{r, p^k, p^(d-k)}).
std::pair<TensorTrain, FitReport> fit_dense_tt(const SampleSet& samples, int rank_cap,
                                               const FitOptions& options);

/// Linear least squares on the graded product basis of a V / W / S space.
struct LinearModel {
    SpaceDescriptor space;
    std::vector<std::vector<Index>> basis;  // dictionary multi-indices, 0-based
    Eigen::VectorXd coefficients;
};
std::pair<LinearModel, FitReport> fit_linear(const SampleSet& samples,
                                             const SpaceDescriptor& space);
Eigen::VectorXd evaluate(const LinearModel& model, const SampleSet& samples);

}  // namespace bstt
