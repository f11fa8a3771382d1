// Serial vs OpenMP timing for the sample-parallel kernels.

#include <chrono>
#include <cstdio>
#include <random>

#include "bstt/block_sparse_tt.hpp"
#include "bstt/eval_kernels.hpp"
#include "bstt/regression.hpp"

using namespace bstt;

namespace {

double time_eval(const BlockSparseTT& model, const SampleSet& samples, ExecutionMode mode,
                 int reps) {
    parallel::set_mode(mode);
    double sink = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) sink += evaluate(model, samples).sum();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sink == 0.12345) std::printf("unlikely\n");
    return secs / reps;
}

}  // namespace

int main(int argc, char** argv) {
    const int m_count = argc > 1 ? std::atoi(argv[1]) : 200000;
    const int d = 10, g = 3, rho = 4;
    const int reps = 5;

    BlockSparseTT model = random_block_sparse(build_block_structure(d, g, rho), 1);
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> unif(-1, 1);
    Eigen::MatrixXd pts(m_count, d);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = unif(gen);
    SampleSet samples(pts, Eigen::VectorXd::Zero(m_count), Dictionary::monomial(g + 1));

    std::printf("evaluate over %d samples, d=%d, g=%d, rho=%d (mean of %d reps)\n", m_count, d, g,
                rho, reps);
    const double serial = time_eval(model, samples, ExecutionMode::Serial, reps);
    std::printf("  serial:   %8.2f ms\n", 1e3 * serial);
    const double par = time_eval(model, samples, ExecutionMode::Parallel, reps);
    std::printf("  parallel: %8.2f ms   (speedup %.2fx)\n", 1e3 * par, serial / par);

    // backward stack build (the right half of the measurement-operator assembly)
    const auto time_backward = [&](ExecutionMode mode) {
        const auto t0 = std::chrono::steady_clock::now();
        for (int r = 0; r < reps; ++r) {
            Eigen::MatrixXd stack = Eigen::MatrixXd::Ones(m_count, 1);
            for (Eigen::Index k = d - 1; k >= 1; --k)
                stack = stack_push_backward(stack, model.tt().component(k), samples.xi(k), mode);
        }
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
    };
    std::printf("backward stack build over %d samples\n", m_count);
    const double bwd_serial = time_backward(ExecutionMode::Serial);
    std::printf("  serial:   %8.2f ms\n", 1e3 * bwd_serial);
    const double bwd_par = time_backward(ExecutionMode::Parallel);
    std::printf("  parallel: %8.2f ms   (speedup %.2fx)\n", 1e3 * bwd_par, bwd_serial / bwd_par);

    // correctness spot check: both modes agree bitwise
    parallel::set_mode(ExecutionMode::Serial);
    Eigen::VectorXd a = evaluate(model, samples);
    parallel::set_mode(ExecutionMode::Parallel);
    Eigen::VectorXd b = evaluate(model, samples);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a(i) != b(i)) {
            std::printf("mode mismatch at sample %lld\n", static_cast<long long>(i));
            return 1;
        }
    std::printf("serial and parallel results match bitwise\n");
    return 0;
}
