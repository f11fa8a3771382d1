#include "bstt/eval_kernels.hpp"

#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace bstt {

namespace parallel {

namespace {
#if defined(_OPENMP)
ExecutionMode g_mode = ExecutionMode::Parallel;
#else
ExecutionMode g_mode = ExecutionMode::Serial;
#endif
}  // namespace

ExecutionMode mode() { return g_mode; }
void set_mode(ExecutionMode m) { g_mode = m; }

}  // namespace parallel

namespace {

inline void forward_row(Eigen::Index m, const Eigen::MatrixXd& s, const DenseTensor& core,
                        const Eigen::MatrixXd& xi, Eigen::MatrixXd& out) {
    const Eigen::Index r0 = core.dim(0), n = core.dim(1), r1 = core.dim(2);
    const double* c = core.data();
    for (Eigen::Index b = 0; b < r1; ++b) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double inner = 0.0;
            for (Eigen::Index a = 0; a < r0; ++a) inner += s(m, a) * c[(a * n + i) * r1 + b];
            acc += xi(i, m) * inner;
        }
        out(m, b) = acc;
    }
}

inline void backward_row(Eigen::Index m, const Eigen::MatrixXd& s, const DenseTensor& core,
                         const Eigen::MatrixXd& xi, Eigen::MatrixXd& out) {
    const Eigen::Index r0 = core.dim(0), n = core.dim(1), r1 = core.dim(2);
    const double* c = core.data();
    for (Eigen::Index a = 0; a < r0; ++a) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double inner = 0.0;
            for (Eigen::Index b = 0; b < r1; ++b) inner += c[(a * n + i) * r1 + b] * s(m, b);
            acc += xi(i, m) * inner;
        }
        out(m, a) = acc;
    }
}

void check_shapes(const Eigen::MatrixXd& s, const DenseTensor& core, const Eigen::MatrixXd& xi,
                  Eigen::Index stack_rank) {
    if (core.order() != 3) throw std::invalid_argument("stack push: core must have order 3");
    if (s.cols() != stack_rank) throw std::invalid_argument("stack push: stack rank mismatch");
    if (xi.rows() < core.dim(1) || xi.cols() != s.rows())
        throw std::invalid_argument("stack push: measurement matrix shape mismatch");
}

}  // namespace

Eigen::MatrixXd stack_push_forward(const Eigen::MatrixXd& s, const DenseTensor& core,
                                   const Eigen::MatrixXd& xi, ExecutionMode mode) {
    check_shapes(s, core, xi, core.dim(0));
    const Eigen::Index m_count = s.rows();
    Eigen::MatrixXd out(m_count, core.dim(2));
    if (mode == ExecutionMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index m = 0; m < m_count; ++m) forward_row(m, s, core, xi, out);
    } else {
        for (Eigen::Index m = 0; m < m_count; ++m) forward_row(m, s, core, xi, out);
    }
    return out;
}

Eigen::MatrixXd stack_push_backward(const Eigen::MatrixXd& s, const DenseTensor& core,
                                    const Eigen::MatrixXd& xi, ExecutionMode mode) {
    check_shapes(s, core, xi, core.dim(2));
    const Eigen::Index m_count = s.rows();
    Eigen::MatrixXd out(m_count, core.dim(0));
    if (mode == ExecutionMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index m = 0; m < m_count; ++m) backward_row(m, s, core, xi, out);
    } else {
        for (Eigen::Index m = 0; m < m_count; ++m) backward_row(m, s, core, xi, out);
    }
    return out;
}

}  // namespace bstt
