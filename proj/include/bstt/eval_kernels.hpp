#pragma once

#include <Eigen/Core>

#include "bstt/dense_tensor.hpp"

namespace bstt {

enum class ExecutionMode { Serial, Parallel };

namespace parallel {
/// Process-wide default for the sample-parallel kernels. Parallel when OpenMP
/// is available unless overridden (CLI --serial, tests, benchmarks).
ExecutionMode mode();
void set_mode(ExecutionMode m);
}  // namespace parallel

/// Forward stack step over samples:
///   out(m, b) = sum_i xi(i, m) * sum_a s(m, a) * core(a, i, b).
/// s is M x r0, core is (r0, n, r1), xi has at least n rows and M columns.
/// The parallel kernel splits the sample range; per-sample arithmetic matches
/// the serial reference exactly, so both modes agree bitwise.
Eigen::MatrixXd stack_push_forward(const Eigen::MatrixXd& s, const DenseTensor& core,
                                   const Eigen::MatrixXd& xi, ExecutionMode mode);

/// Backward step: s is M x r1, result M x r0 with
///   out(m, a) = sum_i xi(i, m) * sum_b core(a, i, b) * s(m, b).
Eigen::MatrixXd stack_push_backward(const Eigen::MatrixXd& s, const DenseTensor& core,
                                    const Eigen::MatrixXd& xi, ExecutionMode mode);

inline Eigen::MatrixXd stack_push_forward(const Eigen::MatrixXd& s, const DenseTensor& core,
                                          const Eigen::MatrixXd& xi) {
    return stack_push_forward(s, core, xi, parallel::mode());
}
inline Eigen::MatrixXd stack_push_backward(const Eigen::MatrixXd& s, const DenseTensor& core,
                                           const Eigen::MatrixXd& xi) {
    return stack_push_backward(s, core, xi, parallel::mode());
}

}  // namespace bstt
