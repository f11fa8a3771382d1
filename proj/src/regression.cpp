#include "bstt/regression.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bstt/linalg.hpp"

namespace bstt {

FitOptions FitOptions::from_json(const nlohmann::json& j) {
    FitOptions o;
    o.max_sweeps = j.value("max_sweeps", o.max_sweeps);
    o.tol = j.value("tol", o.tol);
    o.residual_target = j.value("residual_target", o.residual_target);
    o.lambda = j.value("lambda", o.lambda);
    o.seed = j.value("seed", o.seed);
    o.max_outer = j.value("max_outer", o.max_outer);
    o.outer_tol = j.value("outer_tol", o.outer_tol);
    o.record_microsteps = j.value("record_microsteps", o.record_microsteps);
    return o;
}

void to_json(nlohmann::json& j, const FitOptions& o) {
    j = nlohmann::json{{"max_sweeps", o.max_sweeps},
                       {"tol", o.tol},
                       {"residual_target", o.residual_target},
                       {"lambda", o.lambda},
                       {"seed", o.seed},
                       {"max_outer", o.max_outer},
                       {"outer_tol", o.outer_tol},
                       {"record_microsteps", o.record_microsteps}};
}

void to_json(nlohmann::json& j, const FitReport& r) {
    j = nlohmann::json{{"sweep_residuals", r.sweep_residuals},
                       {"test_error", r.test_error},
                       {"sweeps", r.sweeps},
                       {"termination", r.termination},
                       {"seconds", r.seconds},
                       {"seed", r.seed},
                       {"notes", r.notes}};
    if (!r.microstep_residuals.empty()) j["microstep_residuals"] = r.microstep_residuals;
}

namespace {

double relative_norm(double num, double denom) { return num / (denom > 0.0 ? denom : 1.0); }

std::vector<Triple> full_mask(const DenseTensor& core) {
    std::vector<Triple> mask;
    mask.reserve(static_cast<std::size_t>(core.size()));
    for (Index a = 0; a < core.dim(0); ++a)
        for (Index m = 0; m < core.dim(1); ++m)
            for (Index b = 0; b < core.dim(2); ++b) mask.push_back({a, m, b});
    return mask;
}

/// A tensor train under alternating optimization, either pattern-masked
/// (block-sparse) or dense, optionally with a shadow mode contracted against
/// the all-ones measurement row.
class SweepModel {
public:
    SweepModel(TensorTrain& tt, const BlockStructure* structure) : tt_(tt), bs_(structure) {}

    Index order() const { return tt_.order(); }
    TensorTrain& tt() { return tt_; }

    std::vector<Triple> mask(Index k) const {
        if (bs_) return sparsity_pattern(*bs_, static_cast<int>(k));
        return full_mask(tt_.component(k));
    }

    void right_orthogonalize() {
        if (bs_)
            block_orthogonalize_inplace(tt_, *bs_, Direction::Right);
        else
            tt_ = orthogonalize(tt_, Direction::Right);
    }

    void left_push(Index k) {
        if (bs_)
            block_left_push(tt_, *bs_, k);
        else
            tt_left_push(tt_, k);
    }

private:
    TensorTrain& tt_;
    const BlockStructure* bs_;
};

/// Measurement matrices for a sweep: the sample set's, truncated implicitly to
/// the model's mode dimensions, plus the all-ones row block for a shadow mode.
std::vector<Eigen::MatrixXd> sweep_xi(const TensorTrain& tt, const SampleSet& samples) {
    const Index d_model = tt.order();
    const Index d_data = samples.dimension();
    if (d_model != d_data && d_model != d_data + 1)
        throw std::invalid_argument("model order does not match sample dimension");
    std::vector<Eigen::MatrixXd> xi;
    for (Index k = 0; k < d_data; ++k) {
        const Index p = tt.component(k).dim(1);
        if (p > samples.xi(k).rows())
            throw std::invalid_argument("model mode dimension exceeds dictionary size");
        xi.push_back(samples.xi(k).topRows(p));
    }
    if (d_model == d_data + 1)
        xi.push_back(Eigen::MatrixXd::Ones(tt.component(d_model - 1).dim(1), samples.sample_count()));
    return xi;
}

Eigen::VectorXd evaluate_tt(const TensorTrain& tt, const std::vector<Eigen::MatrixXd>& xi) {
    Eigen::MatrixXd stack = Eigen::MatrixXd::Ones(xi.front().cols(), 1);
    for (Index k = 0; k < tt.order(); ++k)
        stack = stack_push_forward(stack, tt.component(k), xi[static_cast<std::size_t>(k)]);
    return stack.col(0);
}

Eigen::MatrixXd phi_from_stacks(const Eigen::MatrixXd& left, const Eigen::MatrixXd& xi_k,
                                const Eigen::MatrixXd& right, Index p) {
    const Index m_count = left.rows();
    const Index r0 = left.cols(), r1 = right.cols();
    Eigen::MatrixXd phi(m_count, r0 * p * r1);
    for (Index a = 0; a < r0; ++a)
        for (Index i = 0; i < p; ++i)
            for (Index b = 0; b < r1; ++b)
                phi.col((a * p + i) * r1 + b) =
                    left.col(a).array() * xi_k.row(i).transpose().array() * right.col(b).array();
    return phi;
}

struct MaskedSolve {
    DenseTensor core;
    double residual;
    bool empty_mask = false;
};

MaskedSolve solve_masked(const Eigen::MatrixXd& left, const Eigen::MatrixXd& xi_k,
                         const Eigen::MatrixXd& right, const Eigen::VectorXd& y,
                         std::span<const Triple> mask, std::vector<Index> core_shape,
                         double lambda) {
    MaskedSolve out{DenseTensor::zeros(std::move(core_shape)), 0.0, false};
    const double ynorm = y.norm();
    if (mask.empty()) {
        out.residual = relative_norm(ynorm, ynorm);
        out.empty_mask = true;
        return out;
    }
    const Index m_count = left.rows();
    Eigen::MatrixXd a(m_count, static_cast<Index>(mask.size()));
    for (std::size_t j = 0; j < mask.size(); ++j)
        a.col(static_cast<Index>(j)) = left.col(mask[j].left).array() *
                                       xi_k.row(mask[j].mode).transpose().array() *
                                       right.col(mask[j].right).array();
    Eigen::VectorXd v;
    if (lambda > 0.0) {
        const Index n = a.cols();
        Eigen::MatrixXd areg(m_count + n, n);
        areg.topRows(m_count) = a;
        areg.bottomRows(n) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd yreg = Eigen::VectorXd::Zero(m_count + n);
        yreg.head(m_count) = y;
        v = solve_least_squares(areg, yreg);
    } else {
        v = solve_least_squares(a, y);
    }
    for (std::size_t j = 0; j < mask.size(); ++j)
        out.core.at({mask[j].left, mask[j].mode, mask[j].right}) = v(static_cast<Index>(j));
    out.residual = relative_norm((a * v - y).norm(), ynorm);
    return out;
}

/// One Algorithm-style ALS run on a prepared model. The model is repeatedly
/// right orthogonalized, then swept left to right with masked micro-steps,
/// left-orthogonalizing each component after its update.
FitReport run_als(SweepModel model, const std::vector<Eigen::MatrixXd>& xi,
                  const Eigen::VectorXd& y, const FitOptions& options) {
    FitReport report;
    report.seed = options.seed;
    const Index d = model.order();
    const Index m_count = y.size();

    double prev = -1.0;
    report.termination = "max_sweeps";
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        model.right_orthogonalize();

        // right stacks over components k..d-1, index k
        std::vector<Eigen::MatrixXd> right(static_cast<std::size_t>(d) + 1);
        right[static_cast<std::size_t>(d)] = Eigen::MatrixXd::Ones(m_count, 1);
        for (Index k = d - 1; k >= 1; --k)
            right[static_cast<std::size_t>(k)] =
                stack_push_backward(right[static_cast<std::size_t>(k + 1)], model.tt().component(k),
                                    xi[static_cast<std::size_t>(k)]);

        Eigen::MatrixXd left = Eigen::MatrixXd::Ones(m_count, 1);
        double sweep_resid = 0.0;
        for (Index k = 0; k < d; ++k) {
            const auto mask = model.mask(k);
            const auto& core = model.tt().component(k);
            auto solved = solve_masked(left, xi[static_cast<std::size_t>(k)],
                                       right[static_cast<std::size_t>(k + 1)], y, mask,
                                       core.shape(), options.lambda);
            if (solved.empty_mask && report.notes.empty())
                report.notes.push_back("empty mask at component " + std::to_string(k + 1));
            const auto canon = model.tt().canonical_core();
            model.tt().set_component(k, std::move(solved.core));
            model.tt().set_canonical_core(canon);
            sweep_resid = solved.residual;
            if (options.record_microsteps) report.microstep_residuals.push_back(solved.residual);
            if (k + 1 < d) {
                model.left_push(k);
                left = stack_push_forward(left, model.tt().component(k), xi[static_cast<std::size_t>(k)]);
            }
        }

        report.sweep_residuals.push_back(sweep_resid);
        report.sweeps = sweep + 1;
        if (sweep_resid < options.residual_target) {
            report.termination = "converged";
            break;
        }
        if (prev >= 0.0 && prev - sweep_resid < options.tol) {
            report.termination = "stagnation";
            break;
        }
        prev = sweep_resid;
    }
    return report;
}

void scale_first_component(TensorTrain& tt, double factor) {
    DenseTensor c = tt.component(0);
    for (Index i = 0; i < c.size(); ++i) c[i] *= factor;
    const auto canon = tt.canonical_core();
    tt.set_component(0, std::move(c));
    tt.set_canonical_core(canon);
}

/// Initialization scale so that model evaluations start near the data scale.
void rescale_to(TensorTrain& tt, double target_norm) {
    const double norm = tt.frobenius_norm();
    if (norm > 0.0 && target_norm > 0.0) scale_first_component(tt, target_norm / norm);
}

}  // namespace

Eigen::VectorXd evaluate(const TensorTrain& model, const SampleSet& samples) {
    return evaluate_tt(model, sweep_xi(model, samples));
}

Eigen::VectorXd evaluate(const BlockSparseTT& model, const SampleSet& samples) {
    return evaluate(model.tt(), samples);
}

Eigen::VectorXd evaluate(const AugmentedBlockSparseTT& model, const SampleSet& samples) {
    if (model.ambient_order() != samples.dimension())
        throw std::invalid_argument("augmented model order does not match sample dimension");
    return evaluate(model.train.tt(), samples);
}

namespace {

Eigen::MatrixXd assemble_phi_impl(const TensorTrain& tt, const SampleSet& samples, Index k) {
    if (!tt.canonical_core() || *tt.canonical_core() != k)
        throw std::runtime_error("assemble_phi: model must be mixed-canonical with core at the requested position");
    const auto xi = sweep_xi(tt, samples);
    const Index m_count = samples.sample_count();
    Eigen::MatrixXd left = Eigen::MatrixXd::Ones(m_count, 1);
    for (Index j = 0; j < k; ++j)
        left = stack_push_forward(left, tt.component(j), xi[static_cast<std::size_t>(j)]);
    Eigen::MatrixXd right = Eigen::MatrixXd::Ones(m_count, 1);
    for (Index j = tt.order() - 1; j > k; --j)
        right = stack_push_backward(right, tt.component(j), xi[static_cast<std::size_t>(j)]);
    return phi_from_stacks(left, xi[static_cast<std::size_t>(k)], right, tt.component(k).dim(1));
}

}  // namespace

Eigen::MatrixXd assemble_phi(const TensorTrain& model, const SampleSet& samples, Index k) {
    return assemble_phi_impl(model, samples, k);
}

Eigen::MatrixXd assemble_phi(const BlockSparseTT& model, const SampleSet& samples, Index k) {
    return assemble_phi_impl(model.tt(), samples, k);
}

MicroStepResult micro_step(const TensorTrain& model, const SampleSet& samples, Index k,
                           std::span<const Triple> mask, double lambda) {
    if (!model.canonical_core() || *model.canonical_core() != k)
        throw std::runtime_error("micro_step: model must be mixed-canonical with core at the requested position");
    const auto xi = sweep_xi(model, samples);
    const Index m_count = samples.sample_count();
    Eigen::MatrixXd left = Eigen::MatrixXd::Ones(m_count, 1);
    for (Index j = 0; j < k; ++j)
        left = stack_push_forward(left, model.component(j), xi[static_cast<std::size_t>(j)]);
    Eigen::MatrixXd right = Eigen::MatrixXd::Ones(m_count, 1);
    for (Index j = model.order() - 1; j > k; --j)
        right = stack_push_backward(right, model.component(j), xi[static_cast<std::size_t>(j)]);
    auto solved = solve_masked(left, xi[static_cast<std::size_t>(k)], right, samples.targets(), mask,
                               model.component(k).shape(), lambda);
    return {std::move(solved.core), solved.residual};
}

std::pair<BlockSparseTT, FitReport> fit_homogeneous(const SampleSet& samples, int d, int g,
                                                    int rho_max, const FitOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    if (samples.dimension() != d)
        throw std::invalid_argument("fit_homogeneous: sample dimension mismatch");
    if (samples.dictionary().size() < g + 1)
        throw std::invalid_argument("fit_homogeneous: dictionary too small for degree " + std::to_string(g));

    BlockSparseTT model = random_block_sparse(build_block_structure(d, g, rho_max), options.seed);
    rescale_to(model.tt(), samples.targets().norm() / std::sqrt(static_cast<double>(samples.sample_count())));

    FitReport report = run_als(SweepModel(model.tt(), &model.structure()),
                               sweep_xi(model.tt(), samples), samples.targets(), options);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(model), std::move(report)};
}

FitReport refit_homogeneous(BlockSparseTT& model, const SampleSet& samples,
                            const Eigen::VectorXd& targets, const FitOptions& options) {
    if (targets.size() != samples.sample_count())
        throw std::invalid_argument("refit_homogeneous: target length mismatch");
    return run_als(SweepModel(model.tt(), &model.structure()), sweep_xi(model.tt(), samples),
                   targets, options);
}

std::pair<std::vector<BlockSparseTT>, FitReport> fit_sum(const SampleSet& samples, int d, int g,
                                                         int rho_max, const FitOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    if (samples.dimension() != d) throw std::invalid_argument("fit_sum: sample dimension mismatch");
    if (samples.dictionary().size() < g + 1)
        throw std::invalid_argument("fit_sum: dictionary too small for degree " + std::to_string(g));

    const Eigen::VectorXd& y = samples.targets();
    const double ynorm = y.norm();
    const double init_scale =
        ynorm / static_cast<double>(g + 1) / std::sqrt(static_cast<double>(samples.sample_count()));

    std::vector<BlockSparseTT> parts;
    std::vector<Eigen::VectorXd> part_eval;
    for (int gt = 0; gt <= g; ++gt) {
        BlockSparseTT part = random_block_sparse(build_block_structure(d, gt, rho_max),
                                                 options.seed + static_cast<std::uint64_t>(gt));
        rescale_to(part.tt(), init_scale);
        part_eval.push_back(evaluate(part, samples));
        parts.push_back(std::move(part));
    }

    FitReport report;
    report.seed = options.seed;
    report.termination = "max_sweeps";
    Eigen::VectorXd total = Eigen::VectorXd::Zero(y.size());
    for (const auto& e : part_eval) total += e;

    double prev = -1.0;
    int inner_sweeps = 0;
    for (int outer = 0; outer < options.max_outer; ++outer) {
        for (int gt = 0; gt <= g; ++gt) {
            Eigen::VectorXd z = y - (total - part_eval[static_cast<std::size_t>(gt)]);
            FitOptions inner = options;
            inner.record_microsteps = false;
            FitReport inner_report = refit_homogeneous(parts[static_cast<std::size_t>(gt)], samples, z, inner);
            inner_sweeps += inner_report.sweeps;
            total -= part_eval[static_cast<std::size_t>(gt)];
            part_eval[static_cast<std::size_t>(gt)] = evaluate(parts[static_cast<std::size_t>(gt)], samples);
            total += part_eval[static_cast<std::size_t>(gt)];
            if (options.record_microsteps)
                report.microstep_residuals.push_back(relative_norm((y - total).norm(), ynorm));
        }
        const double resid = relative_norm((y - total).norm(), ynorm);
        report.sweep_residuals.push_back(resid);
        report.sweeps = outer + 1;
        if (resid < options.residual_target) {
            report.termination = "converged";
            break;
        }
        // the outer alternation converges linearly; a cycle that fails to shave
        // off an outer_tol fraction of the residual marks the plateau
        if (prev >= 0.0 && prev - resid < options.outer_tol * prev) {
            report.termination = "stagnation";
            break;
        }
        prev = resid;
    }
    report.notes.push_back("inner sweeps total: " + std::to_string(inner_sweeps));
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(parts), std::move(report)};
}

std::pair<AugmentedBlockSparseTT, FitReport> fit_augmented(const SampleSet& samples, int d, int g,
                                                           int rho_max, const FitOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    if (samples.dimension() != d)
        throw std::invalid_argument("fit_augmented: sample dimension mismatch");
    if (samples.dictionary().size() < g + 1)
        throw std::invalid_argument("fit_augmented: dictionary too small for degree " + std::to_string(g));

    AugmentedBlockSparseTT model{random_block_sparse(build_augmented(d, g, rho_max), options.seed)};
    rescale_to(model.train.tt(),
               samples.targets().norm() / std::sqrt(static_cast<double>(samples.sample_count())));

    FitReport report = run_als(SweepModel(model.train.tt(), &model.train.structure()),
                               sweep_xi(model.train.tt(), samples), samples.targets(), options);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(model), std::move(report)};
}

std::pair<TensorTrain, FitReport> fit_dense_tt(const SampleSet& samples, int rank_cap,
                                               const FitOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    if (rank_cap < 1) throw std::invalid_argument("fit_dense_tt: rank cap must be positive");
    const Index d = samples.dimension();
    const Index p = samples.dictionary().size();

    std::vector<Index> ranks(static_cast<std::size_t>(d) + 1, 1);
    for (Index k = 1; k < d; ++k) {
        Index r = rank_cap;
        Index pk = 1;
        for (Index i = 0; i < std::min(k, d - k); ++i) {
            pk *= p;
            if (pk >= r) break;
        }
        ranks[static_cast<std::size_t>(k)] = std::min<Index>(r, pk);
    }
    std::mt19937_64 gen(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<DenseTensor> cores;
    for (Index k = 0; k < d; ++k) {
        DenseTensor c = DenseTensor::zeros({ranks[static_cast<std::size_t>(k)], p,
                                            ranks[static_cast<std::size_t>(k + 1)]});
        for (Index i = 0; i < c.size(); ++i) c[i] = normal(gen);
        cores.push_back(std::move(c));
    }
    TensorTrain model(std::move(cores));
    model = orthogonalize(model, Direction::Right);
    rescale_to(model, samples.targets().norm() / std::sqrt(static_cast<double>(samples.sample_count())));

    FitReport report = run_als(SweepModel(model, nullptr), sweep_xi(model, samples),
                               samples.targets(), options);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(model), std::move(report)};
}

namespace {

void enumerate_basis(Index d, Index p, std::optional<int> degree_sum_max,
                     std::optional<int> degree_sum_exact, std::vector<Index>& cur,
                     std::vector<std::vector<Index>>& out) {
    if (static_cast<Index>(cur.size()) == d) {
        out.push_back(cur);
        return;
    }
    int used = 0;
    for (Index v : cur) used += static_cast<int>(v);
    for (Index m = 0; m < p; ++m) {
        const int total = used + static_cast<int>(m);
        if (degree_sum_max && total > *degree_sum_max) break;
        if (degree_sum_exact) {
            const Index remaining = d - static_cast<Index>(cur.size()) - 1;
            if (total > *degree_sum_exact) break;
            if (total + static_cast<int>(remaining * (p - 1)) < *degree_sum_exact) continue;
        }
        cur.push_back(m);
        enumerate_basis(d, p, degree_sum_max, degree_sum_exact, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<Index>> linear_basis(const SpaceDescriptor& s) {
    std::vector<std::vector<Index>> basis;
    std::vector<Index> cur;
    switch (s.family) {
        case SpaceDescriptor::Family::V:
            enumerate_basis(s.d, s.p, std::nullopt, std::nullopt, cur, basis);
            break;
        case SpaceDescriptor::Family::W:
            enumerate_basis(s.d, s.p, std::nullopt, s.g, cur, basis);
            break;
        case SpaceDescriptor::Family::S:
            enumerate_basis(s.d, s.p, s.g, std::nullopt, cur, basis);
            break;
        default:
            throw std::invalid_argument("fit_linear: " + s.str() + " is not a linear family");
    }
    return basis;
}

Eigen::MatrixXd linear_design(const std::vector<std::vector<Index>>& basis,
                              const SampleSet& samples) {
    const Index m_count = samples.sample_count();
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(m_count, static_cast<Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (Index k = 0; k < samples.dimension(); ++k)
            a.col(static_cast<Index>(j)).array() *=
                samples.xi(k).row(basis[j][static_cast<std::size_t>(k)]).transpose().array();
    return a;
}

}  // namespace

std::pair<LinearModel, FitReport> fit_linear(const SampleSet& samples,
                                             const SpaceDescriptor& space) {
    const auto t0 = std::chrono::steady_clock::now();
    if (samples.dimension() != space.d)
        throw std::invalid_argument("fit_linear: sample dimension mismatch");
    if (samples.dictionary().size() < space.p)
        throw std::invalid_argument("fit_linear: dictionary too small");
    if (space_dimension(space) > 200000)
        throw std::invalid_argument("fit_linear: " + space.str() + " is too large for a dense solve");

    LinearModel model;
    model.space = space;
    model.basis = linear_basis(space);
    Eigen::MatrixXd a = linear_design(model.basis, samples);
    model.coefficients = solve_least_squares(a, samples.targets());

    FitReport report;
    report.sweeps = 1;
    report.termination = "converged";
    report.sweep_residuals.push_back(
        relative_norm((a * model.coefficients - samples.targets()).norm(), samples.targets().norm()));
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(model), std::move(report)};
}

Eigen::VectorXd evaluate(const LinearModel& model, const SampleSet& samples) {
    return linear_design(model.basis, samples) * model.coefficients;
}

}  // namespace bstt
