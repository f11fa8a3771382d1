#include "bstt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include "bstt/block_structure.hpp"

namespace bstt {

HeatSystem discretize_heat_equation(int d) {
    if (d < 2) throw std::invalid_argument("discretize_heat_equation: need at least 2 grid nodes");
    HeatSystem sys;
    sys.h = 2.0 / (d - 1);
    const double w = 1.0 / (sys.h * sys.h);
    sys.a = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        if (i == 0) {
            sys.a(0, 0) = -2.0 * w;
            sys.a(0, 1) = 2.0 * w;  // ghost node mirrors node 1
        } else if (i == d - 1) {
            sys.a(i, i - 1) = 2.0 * w;
            sys.a(i, i) = -2.0 * w;
        } else {
            sys.a(i, i - 1) = w;
            sys.a(i, i) = -2.0 * w;
            sys.a(i, i + 1) = w;
        }
    }
    sys.b_ctrl = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) {
        const double x = -1.0 + sys.h * i;
        if (std::abs(x) <= 0.4 + 1e-12) sys.b_ctrl(i) = 1.0;
    }
    sys.q = sys.h * Eigen::MatrixXd::Identity(d, d);
    return sys;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
    const Eigen::Index d = a.rows();
    if (a.cols() != d || c.rows() != d || c.cols() != d)
        throw std::invalid_argument("solve_lyapunov: square matrices required");
    // vec(A^T P) = (I (x) A^T) vec(P), vec(P A) = (A^T (x) I) vec(P), column-major vec
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(d * d, d * d);
    for (Eigen::Index j = 0; j < d; ++j)
        big.block(j * d, j * d, d, d) += a.transpose();
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i)
            big.block(j * d, i * d, d, d) += a(i, j) * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd rhs(d * d);
    for (Eigen::Index j = 0; j < d; ++j) rhs.segment(j * d, d) = -c.col(j);
    Eigen::VectorXd sol = big.partialPivLu().solve(rhs);
    Eigen::MatrixXd p(d, d);
    for (Eigen::Index j = 0; j < d; ++j) p.col(j) = sol.segment(j * d, d);
    return 0.5 * (p + p.transpose());
}

namespace {

double max_real_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    return es.eigenvalues().real().maxCoeff();
}

double are_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& q,
                    double lambda, const Eigen::MatrixXd& p) {
    return (a.transpose() * p + p * a - p * b * (1.0 / lambda) * b.transpose() * p + q).norm();
}

}  // namespace

Eigen::MatrixXd solve_are(const Eigen::MatrixXd& a, const Eigen::VectorXd& b_ctrl,
                          const Eigen::MatrixXd& q, double lambda) {
    const Eigen::Index d = a.rows();
    if (lambda <= 0.0) throw std::invalid_argument("solve_are: control penalty must be positive");
    if (a.cols() != d || b_ctrl.size() != d || q.rows() != d || q.cols() != d)
        throw std::invalid_argument("solve_are: dimension mismatch");

    Eigen::RowVectorXd gain;
    bool found = false;
    for (double c : {0.0, 1.0, 10.0, 0.1, 100.0}) {
        Eigen::RowVectorXd cand = c * b_ctrl.transpose();
        if (max_real_eigenvalue(a - b_ctrl * cand) < -1e-12) {
            gain = cand;
            found = true;
            break;
        }
    }
    if (!found) throw std::runtime_error("solve_are: no stabilizing initial gain found");

    const double target = 1e-10 * q.norm();
    Eigen::MatrixXd p;
    for (int it = 0; it < 100; ++it) {
        const Eigen::MatrixXd acl = a - b_ctrl * gain;
        p = solve_lyapunov(acl, q + gain.transpose() * lambda * gain);
        gain = (1.0 / lambda) * b_ctrl.transpose() * p;
        if (are_residual(a, b_ctrl, q, lambda, p) <= target) return p;
    }
    throw std::runtime_error("solve_are: no convergence after 100 Newton steps, residual " +
                             std::to_string(are_residual(a, b_ctrl, q, lambda, p)));
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("empirical_quantile: q outside [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t space_index, std::uint64_t m_index,
                          std::uint64_t trial_index) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t s = mix(base);
    s = mix(s ^ (space_index + 1));
    s = mix(s ^ (m_index + 1));
    s = mix(s ^ (trial_index + 1));
    return s;
}

namespace {

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.spaces.empty()) throw std::invalid_argument("study: no spaces given");
    if (cfg.trials < 1) throw std::invalid_argument("study: trials must be at least 1");
    if (cfg.test_samples < 1) throw std::invalid_argument("study: test set must not be empty");
    if (cfg.sample_sizes.empty()) throw std::invalid_argument("study: no sample sizes given");
    for (std::size_t i = 0; i < cfg.sample_sizes.size(); ++i) {
        if (cfg.sample_sizes[i] < 1)
            throw std::invalid_argument("study: sample sizes must be positive");
        if (i > 0 && cfg.sample_sizes[i] <= cfg.sample_sizes[i - 1])
            throw std::invalid_argument("study: sample sizes must be strictly increasing");
    }
    const int d = cfg.spaces.front().d;
    for (const auto& s : cfg.spaces)
        if (s.d != d) throw std::invalid_argument("study: all spaces must share the dimension");
}

Eigen::MatrixXd uniform_points(std::mt19937_64& gen, int m, int d) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd pts(m, d);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < d; ++k) pts(i, k) = unif(gen);
    return pts;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(c);
        else if (c == ',' || c == ';')
            out.push_back('_');
    }
    return out;
}

struct FitOutcome {
    Eigen::VectorXd test_values;
    FitReport report;
};

FitOutcome dispatch_fit(const SpaceDescriptor& space, const SampleSet& train,
                        const SampleSet& test, const FitOptions& options) {
    using Family = SpaceDescriptor::Family;
    FitOutcome out;
    switch (space.family) {
        case Family::V:
        case Family::W:
        case Family::S: {
            auto [model, report] = fit_linear(train, space);
            out.test_values = evaluate(model, test);
            out.report = std::move(report);
            break;
        }
        case Family::BrhoW: {
            auto [model, report] = fit_homogeneous(train, space.d, space.g, space.rho_max, options);
            out.test_values = evaluate(model, test);
            out.report = std::move(report);
            break;
        }
        case Family::Srho: {
            auto [models, report] = fit_sum(train, space.d, space.g, space.rho_max, options);
            out.test_values = Eigen::VectorXd::Zero(test.sample_count());
            for (const auto& m : models) out.test_values += evaluate(m, test);
            out.report = std::move(report);
            break;
        }
        case Family::SrhoAug: {
            auto [model, report] = fit_augmented(train, space.d, space.g, space.rho_max, options);
            out.test_values = evaluate(model, test);
            out.report = std::move(report);
            break;
        }
        case Family::TrV: {
            auto [model, report] = fit_dense_tt(train, space.r, options);
            out.test_values = evaluate(model, test);
            out.report = std::move(report);
            break;
        }
    }
    return out;
}

StudyResult run_study(const ExperimentConfig& cfg,
                      const std::function<double(const Eigen::VectorXd&)>& target,
                      const std::function<Dictionary(int)>& dictionary_for_p) {
    validate_config(cfg);
    const int d = cfg.spaces.front().d;

    StudyResult result;
    for (const auto& space : cfg.spaces)
        result.dof_lines.emplace_back(space.str(), dof_count(space));

    const std::size_t total = cfg.spaces.size() * cfg.sample_sizes.size() *
                              static_cast<std::size_t>(cfg.trials);
    result.records.resize(total);

    for (std::size_t si = 0; si < cfg.spaces.size(); ++si) {
        const auto& space = cfg.spaces[si];
        const Dictionary dict = dictionary_for_p(space.p);
        for (std::size_t mi = 0; mi < cfg.sample_sizes.size(); ++mi) {
            const int m = cfg.sample_sizes[mi];
#pragma omp parallel for schedule(dynamic)
            for (int trial = 0; trial < cfg.trials; ++trial) {
                const std::uint64_t seed = derive_seed(cfg.seed, si, mi, static_cast<std::uint64_t>(trial));
                TrialRecord rec;
                rec.sample_size = m;
                rec.trial = trial;
                rec.seed = seed;
                rec.space = space.str();
                const auto t0 = std::chrono::steady_clock::now();
                // nothing may escape the worker region; failures become records
                try {
                    std::mt19937_64 gen(seed);
                    Eigen::MatrixXd train_pts = uniform_points(gen, m, d);
                    Eigen::VectorXd train_y(m);
                    for (int i = 0; i < m; ++i) train_y(i) = target(train_pts.row(i).transpose());
                    Eigen::MatrixXd test_pts = uniform_points(gen, cfg.test_samples, d);
                    Eigen::VectorXd test_y(cfg.test_samples);
                    for (int i = 0; i < cfg.test_samples; ++i)
                        test_y(i) = target(test_pts.row(i).transpose());

                    SampleSet train(train_pts, train_y, dict);
                    SampleSet test(test_pts, test_y, dict);
                    if (!cfg.dump_prefix.empty()) {
                        const std::string stem = cfg.dump_prefix + "_" + sanitize(space.str()) +
                                                 "_M" + std::to_string(m) + "_t" + std::to_string(trial);
                        dump_csv(stem + "_train.csv", train_pts, train_y);
                        dump_csv(stem + "_test.csv", test_pts, test_y);
                    }

                    FitOptions options = cfg.options;
                    options.seed = seed;
                    FitOutcome outcome = dispatch_fit(space, train, test, options);
                    const double denom = test_y.norm();
                    rec.error = (outcome.test_values - test_y).norm() / (denom > 0.0 ? denom : 1.0);
                    rec.sweeps = outcome.report.sweeps;
                } catch (const std::exception& e) {
                    rec.error = std::numeric_limits<double>::quiet_NaN();
                    rec.failure = e.what();
                }
                const double seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                rec.seconds = cfg.timing ? seconds : 0.0;
                const std::size_t slot = (si * cfg.sample_sizes.size() + mi) *
                                             static_cast<std::size_t>(cfg.trials) +
                                         static_cast<std::size_t>(trial);
                result.records[slot] = std::move(rec);
            }
        }
    }

    StudyResult aggregated = aggregate_records(std::move(result.records));
    aggregated.dof_lines = std::move(result.dof_lines);
    return aggregated;
}

}  // namespace

StudyResult run_riccati_study(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const int d = cfg.spaces.front().d;
    const HeatSystem sys = discretize_heat_equation(d);
    const Eigen::MatrixXd p = solve_are(sys.a, sys.b_ctrl, sys.q, cfg.control_penalty);
    return run_study(
        cfg, [&p](const Eigen::VectorXd& y0) { return y0.dot(p * y0); },
        [](int dict_size) { return Dictionary::monomial(dict_size); });
}

StudyResult run_gaussian_study(const ExperimentConfig& cfg) {
    return run_study(
        cfg, [](const Eigen::VectorXd& x) { return std::exp(-x.squaredNorm()); },
        [](int dict_size) { return Dictionary::legendre(dict_size); });
}

IngestFitResult ingest_fit(const SampleSet& train, const std::optional<SampleSet>& test,
                           const SpaceDescriptor& space, const FitOptions& options) {
    IngestFitResult out;
    const SampleSet& test_set = test ? *test : train;
    FitOutcome outcome = dispatch_fit(space, train, test_set, options);
    out.report = std::move(outcome.report);
    out.train_residual = out.report.sweep_residuals.empty() ? -1.0 : out.report.sweep_residuals.back();
    if (test) {
        const double denom = test->targets().norm();
        out.test_error = (outcome.test_values - test->targets()).norm() / (denom > 0.0 ? denom : 1.0);
        out.report.test_error = out.test_error;
    }
    return out;
}

void emit_study(const StudyResult& result, const std::string& prefix) {
    {
        std::ofstream out(prefix + ".jsonl", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + prefix + ".jsonl'");
        for (const auto& r : result.records) {
            nlohmann::json j{{"M", r.sample_size},   {"trial", r.trial},   {"seed", r.seed},
                             {"space", r.space},     {"error", r.error},   {"sweeps", r.sweeps},
                             {"seconds", r.seconds}};
            if (!r.failure.empty()) j["failure"] = r.failure;  // NaN error dumps as null
            out << j.dump() << "\n";
        }
        if (!out) throw std::runtime_error("write failed for '" + prefix + ".jsonl'");
    }
    {
        std::ofstream out(prefix + ".csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + prefix + ".csv'");
        out << "space,M,q15,median,q85\n";
        char buf[64];
        for (const auto& q : result.quantiles) {
            out << q.space << "," << q.sample_size;
            for (double v : {q.q15, q.median, q.q85}) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out << "," << buf;
            }
            out << "\n";
        }
        if (!out) throw std::runtime_error("write failed for '" + prefix + ".csv'");
    }
}

std::vector<TrialRecord> read_records_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<TrialRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        TrialRecord r;
        r.sample_size = j.at("M").get<int>();
        r.trial = j.at("trial").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.space = j.at("space").get<std::string>();
        r.error = j.at("error").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                          : j.at("error").get<double>();
        r.sweeps = j.at("sweeps").get<int>();
        r.seconds = j.at("seconds").get<double>();
        r.failure = j.value("failure", "");
        records.push_back(std::move(r));
    }
    return records;
}

StudyResult aggregate_records(std::vector<TrialRecord> records) {
    StudyResult result;
    result.records = std::move(records);
    std::vector<std::pair<std::string, int>> keys;
    for (const auto& r : result.records) {
        std::pair<std::string, int> key{r.space, r.sample_size};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (const auto& [space, m] : keys) {
        std::vector<double> errors;
        for (const auto& r : result.records)
            if (r.space == space && r.sample_size == m && std::isfinite(r.error))
                errors.push_back(r.error);
        if (errors.empty()) continue;  // every trial failed: no quantile row
        QuantileRow row;
        row.space = space;
        row.sample_size = m;
        row.q15 = empirical_quantile(errors, 0.15);
        row.median = empirical_quantile(errors, 0.5);
        row.q85 = empirical_quantile(errors, 0.85);
        result.quantiles.push_back(std::move(row));
    }
    return result;
}

}  // namespace bstt
