#include <doctest.h>

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>

#include "bstt/linalg.hpp"
#include "bstt/regression.hpp"

using namespace bstt;

namespace {

Eigen::MatrixXd uniform_points(int m, int d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(-1, 1);
    Eigen::MatrixXd pts(m, d);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < d; ++k) pts(i, k) = unif(gen);
    return pts;
}

// dense contraction oracle: u(x) = sum_m c(m) prod_k Psi(x_k)[m_k]
double eval_dense_oracle(const DenseTensor& c, const Dictionary& dict, const Eigen::VectorXd& x) {
    const Index d = c.order();
    std::vector<Eigen::VectorXd> psi;
    for (Index k = 0; k < d; ++k) psi.push_back(dict(x(k)));
    std::vector<Index> idx(static_cast<std::size_t>(d), 0);
    double sum = 0.0;
    for (Index lin = 0; lin < c.size(); ++lin) {
        double prod = c[lin];
        for (Index k = 0; k < d; ++k) prod *= psi[static_cast<std::size_t>(k)](idx[static_cast<std::size_t>(k)]);
        sum += prod;
        for (Index k = d - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < c.dim(k)) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return sum;
}

SampleSet samples_from_model(const BlockSparseTT& truth, int m, const Dictionary& dict,
                             std::uint64_t seed) {
    const int d = static_cast<int>(truth.tt().order());
    Eigen::MatrixXd pts = uniform_points(m, d, seed);
    SampleSet tmp(pts, Eigen::VectorXd::Zero(m), dict);
    Eigen::VectorXd y = evaluate(truth, tmp);
    return SampleSet(pts, y, dict);
}

}  // namespace

TEST_SUITE("regression") {

TEST_CASE("evaluate: separable all-ones train and the zero model") {
    std::vector<DenseTensor> cores(3, DenseTensor::from_values({1, 2, 1}, {1, 1}));
    TensorTrain ones(cores);
    Eigen::MatrixXd pts = Eigen::MatrixXd::Ones(1, 3);
    SampleSet s(pts, Eigen::VectorXd::Zero(1), Dictionary::monomial(2));
    Eigen::VectorXd u = evaluate(ones, s);
    CHECK(u(0) == doctest::Approx(8.0));  // prod_k (1 + x_k) at x = (1,1,1)

    std::vector<DenseTensor> zc(3, DenseTensor::zeros({1, 2, 1}));
    TensorTrain zero(zc);
    Eigen::VectorXd uz = evaluate(zero, SampleSet(uniform_points(10, 3, 1), Eigen::VectorXd::Zero(10),
                                                  Dictionary::monomial(2)));
    CHECK(uz.norm() == 0.0);
}

TEST_CASE("evaluate matches the dense contraction oracle") {
    const Dictionary dict = Dictionary::monomial(3);
    BlockSparseTT model = random_block_sparse(build_block_structure(4, 2, 2), 5);
    DenseTensor c = tt_to_dense(model.tt());
    Eigen::MatrixXd pts = uniform_points(100, 4, 7);
    SampleSet s(pts, Eigen::VectorXd::Zero(100), dict);
    Eigen::VectorXd u = evaluate(model, s);
    for (int m = 0; m < 100; ++m) {
        const double oracle = eval_dense_oracle(c, dict, pts.row(m).transpose());
        CHECK(std::abs(u(m) - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)));
    }
}

TEST_CASE("assemble_phi: degenerate d=1 equals the measurement transpose") {
    Eigen::MatrixXd pts = uniform_points(6, 1, 3);
    SampleSet s(pts, Eigen::VectorXd::Zero(6), Dictionary::monomial(4));
    TensorTrain t({DenseTensor::from_values({1, 4, 1}, {1, 2, 3, 4})});
    t.set_canonical_core(0);
    Eigen::MatrixXd phi = assemble_phi(t, s, 0);
    CHECK(phi.rows() == 6);
    CHECK(phi.cols() == 4);
    CHECK((phi - s.xi(0).transpose()).norm() == 0.0);
}

TEST_CASE("phi contracted with the core reproduces the evaluation at every position") {
    const Dictionary dict = Dictionary::monomial(2);
    BlockSparseTT model = random_block_sparse(build_block_structure(5, 1, 2), 11);
    SampleSet s(uniform_points(20, 5, 13), Eigen::VectorXd::Zero(20), dict);
    Eigen::VectorXd u = evaluate(model, s);

    TensorTrain canon = model.tt();
    // walk the canonical core from 0 to d-1 and test the identity at each k
    for (Index k = 0; k < canon.order(); ++k) {
        if (k == 0) {
            block_orthogonalize_inplace(canon, model.structure(), Direction::Right);
        } else {
            block_left_push(canon, model.structure(), k - 1);
        }
        REQUIRE(canon.canonical_core() == std::optional<Index>(k));
        Eigen::MatrixXd phi = assemble_phi(canon, s, k);
        const auto& core = canon.component(k);
        Eigen::VectorXd vec(core.size());
        for (Index i = 0; i < core.size(); ++i) vec(i) = core[i];
        CHECK((phi * vec - u).norm() <= 1e-12 * std::max(1.0, u.norm()));
    }
}

TEST_CASE("cached stacks and from-scratch interface evaluations agree bitwise") {
    const Dictionary dict = Dictionary::monomial(3);
    BlockSparseTT model = random_block_sparse(build_block_structure(4, 2, 2), 17);
    SampleSet s(uniform_points(15, 4, 19), Eigen::VectorXd::Zero(15), dict);
    TensorTrain canon = model.tt();
    block_orthogonalize_inplace(canon, model.structure(), Direction::Right);
    block_left_push(canon, model.structure(), 0);
    block_left_push(canon, model.structure(), 1);  // canonical core now at 2

    // incremental left stack, as a sweep would cache it
    Eigen::MatrixXd left = Eigen::MatrixXd::Ones(15, 1);
    std::vector<Eigen::MatrixXd> xi;
    for (Index k = 0; k < 4; ++k) xi.push_back(s.xi(k));
    left = stack_push_forward(left, canon.component(0), xi[0], ExecutionMode::Serial);
    left = stack_push_forward(left, canon.component(1), xi[1], ExecutionMode::Serial);

    Eigen::MatrixXd scratch = interface_evaluations(canon, 2, Direction::Left, xi);
    REQUIRE(scratch.rows() == left.rows());
    REQUIRE(scratch.cols() == left.cols());
    for (Eigen::Index i = 0; i < left.size(); ++i) CHECK(left.data()[i] == scratch.data()[i]);
}

TEST_CASE("micro_step: restricted solve matches the dense oracle and never increases the residual") {
    const Dictionary dict = Dictionary::monomial(3);
    BlockSparseTT truth = random_block_sparse(build_block_structure(4, 2, 2), 23);
    SampleSet s = samples_from_model(truth, 200, dict, 29);

    BlockSparseTT model = random_block_sparse(build_block_structure(4, 2, 2), 31);
    TensorTrain& tt = model.tt();
    block_orthogonalize_inplace(tt, model.structure(), Direction::Right);

    const Eigen::VectorXd before = evaluate(model, s) - s.targets();
    const double resid_before = before.norm() / s.targets().norm();

    const auto mask = sparsity_pattern(model.structure(), 0);
    MicroStepResult step = micro_step(tt, s, 0, mask);
    CHECK(step.residual <= resid_before + 1e-12);

    // oracle: solve the same restricted system from the explicitly assembled phi
    Eigen::MatrixXd phi = assemble_phi(tt, s, 0);
    Eigen::MatrixXd a(s.sample_count(), static_cast<Eigen::Index>(mask.size()));
    const auto& core = tt.component(0);
    for (std::size_t j = 0; j < mask.size(); ++j) {
        const Index col = (mask[j].left * core.dim(1) + mask[j].mode) * core.dim(2) + mask[j].right;
        a.col(static_cast<Eigen::Index>(j)) = phi.col(col);
    }
    Eigen::VectorXd oracle = solve_least_squares(a, s.targets());
    for (std::size_t j = 0; j < mask.size(); ++j) {
        const double got = step.core.at({mask[j].left, mask[j].mode, mask[j].right});
        CHECK(std::abs(got - oracle(static_cast<Eigen::Index>(j))) <= 1e-10 * std::max(1.0, std::abs(oracle(static_cast<Eigen::Index>(j)))));
    }

    // off-mask entries are exactly zero
    double off_mass = 0.0;
    for (Index aa = 0; aa < step.core.dim(0); ++aa)
        for (Index mm = 0; mm < step.core.dim(1); ++mm)
            for (Index bb = 0; bb < step.core.dim(2); ++bb) {
                const bool in_mask = std::any_of(mask.begin(), mask.end(), [&](const Triple& t) {
                    return t.left == aa && t.mode == mm && t.right == bb;
                });
                if (!in_mask) off_mass += std::abs(step.core.at({aa, mm, bb}));
            }
    CHECK(off_mass == 0.0);
}

TEST_CASE("micro_step with an empty mask zeroes the component") {
    Eigen::MatrixXd pts = uniform_points(10, 2, 151);
    SampleSet s(pts, Eigen::VectorXd::Ones(10), Dictionary::monomial(2));
    BlockSparseTT model = random_block_sparse(build_block_structure(2, 1, 1), 3);
    TensorTrain tt = model.tt();
    block_orthogonalize_inplace(tt, model.structure(), Direction::Right);
    MicroStepResult step = micro_step(tt, s, 0, std::vector<Triple>{});
    for (Index i = 0; i < step.core.size(); ++i) CHECK(step.core[i] == 0.0);
    CHECK(step.residual == doctest::Approx(1.0));  // nothing fitted
}

TEST_CASE("micro_step with a full mask at d=1 is ordinary linear regression") {
    Eigen::MatrixXd pts = uniform_points(30, 1, 37);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) y(i) = 2.0 + 3.0 * pts(i, 0);
    SampleSet s(pts, y, Dictionary::monomial(3));
    TensorTrain t({DenseTensor::zeros({1, 3, 1})});
    t.set_canonical_core(0);
    std::vector<Triple> mask;
    for (Index m = 0; m < 3; ++m) mask.push_back({0, m, 0});
    MicroStepResult step = micro_step(t, s, 0, mask);
    CHECK(step.core.at({0, 0, 0}) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(step.core.at({0, 1, 0}) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(step.core.at({0, 2, 0}) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(step.residual <= 1e-12);
}

TEST_CASE("fit_homogeneous recovers an exact-class target") {
    const Dictionary dict = Dictionary::monomial(3);
    const int d = 4, g = 2, rho = 2;
    const auto dof = pattern_size(build_block_structure(d, g, rho));
    std::vector<double> errors;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        BlockSparseTT truth = random_block_sparse(build_block_structure(d, g, rho), 1000 + seed);
        SampleSet train = samples_from_model(truth, static_cast<int>(10 * dof), dict, 2000 + seed);
        FitOptions opts;
        opts.seed = seed;
        auto [model, report] = fit_homogeneous(train, d, g, rho, opts);

        SampleSet test = samples_from_model(truth, 500, dict, 3000 + seed);
        Eigen::VectorXd diff = evaluate(model, test) - test.targets();
        errors.push_back(diff.norm() / test.targets().norm());
    }
    std::sort(errors.begin(), errors.end());
    CHECK(errors[errors.size() / 2] <= 1e-8);  // median
}

TEST_CASE("fit_homogeneous with g = 0 recovers the mean") {
    Eigen::MatrixXd pts = uniform_points(50, 3, 41);
    Eigen::VectorXd y(50);
    std::mt19937_64 gen(43);
    std::normal_distribution<double> normal(2.0, 1.0);
    for (int i = 0; i < 50; ++i) y(i) = normal(gen);
    SampleSet s(pts, y, Dictionary::monomial(1));
    FitOptions opts;
    auto [model, report] = fit_homogeneous(s, 3, 0, 1, opts);
    Eigen::VectorXd u = evaluate(model, s);
    const double mean = y.mean();
    for (int i = 0; i < 50; ++i) CHECK(u(i) == doctest::Approx(mean).epsilon(1e-10));
}

TEST_CASE("training residual is non-increasing per micro-step without a regularizer") {
    const Dictionary dict = Dictionary::monomial(3);
    std::mt19937_64 gen(47);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd pts = uniform_points(120, 4, 53);
    Eigen::VectorXd y(120);
    for (int i = 0; i < 120; ++i) y(i) = normal(gen);  // noisy target, no exact fit
    SampleSet s(pts, y, dict);
    FitOptions opts;
    opts.record_microsteps = true;
    opts.max_sweeps = 8;
    auto [model, report] = fit_homogeneous(s, 4, 2, 2, opts);
    REQUIRE(report.microstep_residuals.size() >= 8);
    for (std::size_t i = 1; i < report.microstep_residuals.size(); ++i)
        CHECK(report.microstep_residuals[i] <= report.microstep_residuals[i - 1] + 1e-10);
    BlockSparseTT::validate(model.tt(), model.structure());  // off-pattern stays bit-zero
}

TEST_CASE("eigenvector property survives the sweeps") {
    const Dictionary dict = Dictionary::monomial(4);
    BlockSparseTT truth = random_block_sparse(build_block_structure(4, 3, 2), 59);
    SampleSet s = samples_from_model(truth, 400, dict, 61);
    FitOptions opts;
    opts.max_sweeps = 5;
    auto [model, report] = fit_homogeneous(s, 4, 3, 2, opts);
    DenseTensor c = tt_to_dense(model.tt());
    DenseTensor lc = degree_operator_apply(c);
    CHECK((lc - 3.0 * c).frobenius_norm() <= 1e-10 * c.frobenius_norm());
}

TEST_CASE("fit_sum recovers a two-degree target and never backtracks") {
    const Dictionary dict = Dictionary::monomial(3);
    const int d = 4, g = 2, rho = 1;
    BlockSparseTT u0 = random_block_sparse(build_block_structure(d, 0, rho), 71);
    BlockSparseTT u2 = random_block_sparse(build_block_structure(d, g, rho), 73);

    Eigen::MatrixXd pts = uniform_points(300, d, 79);
    SampleSet probe(pts, Eigen::VectorXd::Zero(300), dict);
    Eigen::VectorXd y = evaluate(u0, probe) + evaluate(u2, probe);
    SampleSet train(pts, y, dict);

    FitOptions opts;
    opts.record_microsteps = true;
    auto [models, report] = fit_sum(train, d, g, rho, opts);
    REQUIRE(models.size() == 3);

    for (std::size_t i = 1; i < report.microstep_residuals.size(); ++i)
        CHECK(report.microstep_residuals[i] <= report.microstep_residuals[i - 1] + 1e-10);

    Eigen::MatrixXd test_pts = uniform_points(200, d, 83);
    SampleSet test(test_pts, Eigen::VectorXd::Zero(200), dict);
    Eigen::VectorXd truth_vals = evaluate(u0, test) + evaluate(u2, test);
    Eigen::VectorXd fit_vals = Eigen::VectorXd::Zero(200);
    for (const auto& m : models) fit_vals += evaluate(m, test);
    CHECK((fit_vals - truth_vals).norm() <= 1e-7 * truth_vals.norm());
}

TEST_CASE("fit_sum with g = 0 equals fit_homogeneous with g = 0") {
    Eigen::MatrixXd pts = uniform_points(40, 2, 89);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) y(i) = 1.0 + 0.1 * i;
    SampleSet s(pts, y, Dictionary::monomial(1));
    FitOptions opts;
    auto [sum_models, r1] = fit_sum(s, 2, 0, 1, opts);
    auto [single, r2] = fit_homogeneous(s, 2, 0, 1, opts);
    Eigen::VectorXd a = evaluate(sum_models[0], s);
    Eigen::VectorXd b = evaluate(single, s);
    CHECK((a - b).norm() <= 1e-10 * b.norm());
}

TEST_CASE("fit_augmented reaches the sum-fit error regime and matches its slice sum") {
    const Dictionary dict = Dictionary::monomial(3);
    const int d = 4, g = 2, rho = 1;
    BlockSparseTT u0 = random_block_sparse(build_block_structure(d, 0, rho), 91);
    BlockSparseTT u2 = random_block_sparse(build_block_structure(d, g, rho), 93);
    Eigen::MatrixXd pts = uniform_points(400, d, 97);
    SampleSet probe(pts, Eigen::VectorXd::Zero(400), dict);
    Eigen::VectorXd y = evaluate(u0, probe) + evaluate(u2, probe);
    SampleSet train(pts, y, dict);

    FitOptions opts;
    auto [model, report] = fit_augmented(train, d, g, rho, opts);

    Eigen::MatrixXd test_pts = uniform_points(200, d, 101);
    SampleSet test(test_pts, Eigen::VectorXd::Zero(200), dict);
    Eigen::VectorXd truth_vals = evaluate(u0, test) + evaluate(u2, test);
    Eigen::VectorXd fit_vals = evaluate(model, test);
    CHECK((fit_vals - truth_vals).norm() <= 1e-6 * truth_vals.norm());

    // ones-contraction equals the sum of the dense degree slices on samples
    DenseTensor full = tt_to_dense(model.train.tt());
    Eigen::VectorXd slice_sum = Eigen::VectorXd::Zero(200);
    for (Index m = 0; m <= g; ++m) {
        DenseTensor e = DenseTensor::zeros({g + 1});
        e[m] = 1.0;
        DenseTensor slice = contract(full, std::vector<Index>{d}, e, std::vector<Index>{0});
        for (int i = 0; i < 200; ++i)
            slice_sum(i) += eval_dense_oracle(slice, dict, test_pts.row(i).transpose());
    }
    CHECK((fit_vals - slice_sum).norm() <= 1e-12 * std::max(1.0, slice_sum.norm()));
}

TEST_CASE("sample order does not change the fitted function") {
    const Dictionary dict = Dictionary::monomial(3);
    BlockSparseTT truth = random_block_sparse(build_block_structure(4, 2, 2), 103);
    Eigen::MatrixXd pts = uniform_points(300, 4, 107);
    SampleSet tmp(pts, Eigen::VectorXd::Zero(300), dict);
    Eigen::VectorXd y = evaluate(truth, tmp);

    Eigen::MatrixXd rev_pts(300, 4);
    Eigen::VectorXd rev_y(300);
    for (int i = 0; i < 300; ++i) {
        rev_pts.row(i) = pts.row(299 - i);
        rev_y(i) = y(299 - i);
    }

    FitOptions opts;
    opts.seed = 5;
    auto [m1, r1] = fit_homogeneous(SampleSet(pts, y, dict), 4, 2, 2, opts);
    auto [m2, r2] = fit_homogeneous(SampleSet(rev_pts, rev_y, dict), 4, 2, 2, opts);
    SampleSet test(uniform_points(100, 4, 109), Eigen::VectorXd::Zero(100), dict);
    Eigen::VectorXd a = evaluate(m1, test);
    Eigen::VectorXd b = evaluate(m2, test);
    CHECK((a - b).norm() <= 1e-10 * std::max(1.0, a.norm()));
}

TEST_CASE("dense train fit approximates a separable function") {
    const Dictionary dict = Dictionary::legendre(5);
    Eigen::MatrixXd pts = uniform_points(300, 3, 113);
    Eigen::VectorXd y(300);
    for (int i = 0; i < 300; ++i) {
        double prod = 1.0;
        for (int k = 0; k < 3; ++k) prod *= (1.0 + 0.5 * pts(i, k));
        y(i) = prod;
    }
    SampleSet s(pts, y, dict);
    FitOptions opts;
    opts.tol = 1e-12;
    auto [model, report] = fit_dense_tt(s, 1, opts);
    CHECK(report.sweep_residuals.back() <= 1e-10);  // exact-class rank-1 target
}

TEST_CASE("linear fits on W and S spaces") {
    const Dictionary dict = Dictionary::monomial(3);
    Eigen::MatrixXd pts = uniform_points(200, 3, 127);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) {
        const double x1 = pts(i, 0), x2 = pts(i, 1), x3 = pts(i, 2);
        y(i) = x1 * x2 + 0.5 * x3 * x3 - 2.0 * x1 * x3;
    }
    SampleSet s(pts, y, dict);
    auto [model, report] = fit_linear(s, SpaceDescriptor::parse("W(d=3,g=2)"));
    CHECK(report.sweep_residuals.back() <= 1e-12);
    Eigen::VectorXd u = evaluate(model, s);
    CHECK((u - y).norm() <= 1e-10 * y.norm());

    // constants are not in W_2, so the S fit wins on a shifted target
    Eigen::VectorXd y2 = y.array() + 1.0;
    SampleSet s2(pts, y2, dict);
    auto [w_model, w_rep] = fit_linear(s2, SpaceDescriptor::parse("W(d=3,g=2)"));
    auto [s_model, s_rep] = fit_linear(s2, SpaceDescriptor::parse("S(d=3,g=2)"));
    CHECK(s_rep.sweep_residuals.back() <= 1e-12);
    CHECK(w_rep.sweep_residuals.back() > 1e-3);
    CHECK(fit_linear(s, SpaceDescriptor::parse("S(d=3,g=2)")).first.basis.size() == 10);
}

TEST_CASE("fit options round trip through json") {
    nlohmann::json j{{"max_sweeps", 17}, {"tol", 1e-6}, {"lambda", 0.5}, {"seed", 9}};
    FitOptions o = FitOptions::from_json(j);
    CHECK(o.max_sweeps == 17);
    CHECK(o.tol == 1e-6);
    CHECK(o.lambda == 0.5);
    CHECK(o.seed == 9);
    nlohmann::json back = o;
    CHECK(back.at("max_sweeps") == 17);

    FitReport r;
    r.sweep_residuals = {0.5, 0.25};
    r.sweeps = 2;
    r.termination = "stagnation";
    nlohmann::json jr = r;
    CHECK(jr.at("termination") == "stagnation");
}

}  // TEST_SUITE
