#pragma once

#include <Eigen/Core>

namespace bstt {

inline constexpr double kPinvCutoff = 1e-12;   // relative singular-value cutoff sigma/sigma_max
inline constexpr double kRankCutoff = 1e-10;   // relative cutoff for numerical rank decisions

/// Minimum-norm minimizer of ||A v - y||_2 via SVD with cutoff kPinvCutoff * sigma_max.
Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                    double cutoff = kPinvCutoff);

/// Number of singular values above cutoff * sigma_max.
Eigen::Index matrix_rank(const Eigen::MatrixXd& A, double cutoff = kRankCutoff);

/// Thin QR with the sign convention diag(R) >= 0. Q is m x k, R is k x n, k = min(m, n).
void thin_qr(const Eigen::MatrixXd& A, Eigen::MatrixXd& Q, Eigen::MatrixXd& R);

/// Thin LQ (A = L * Q) with diag(L) >= 0. L is m x k, Q is k x n, k = min(m, n).
void thin_lq(const Eigen::MatrixXd& A, Eigen::MatrixXd& L, Eigen::MatrixXd& Q);

}  // namespace bstt
