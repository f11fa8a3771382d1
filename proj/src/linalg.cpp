#include "bstt/linalg.hpp"

#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace bstt {

Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                    double cutoff) {
    if (A.rows() != y.size())
        throw std::invalid_argument("solve_least_squares: row count does not match rhs length");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(cutoff);
    return svd.solve(y);
}

Eigen::Index matrix_rank(const Eigen::MatrixXd& A, double cutoff) {
    if (A.size() == 0) return 0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double thresh = cutoff * sv(0);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > thresh) ++r;
    return r;
}

void thin_qr(const Eigen::MatrixXd& A, Eigen::MatrixXd& Q, Eigen::MatrixXd& R) {
    const Eigen::Index k = std::min(A.rows(), A.cols());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), k);
    R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < k; ++i) {
        if (R(i, i) < 0) {
            R.row(i) = -R.row(i);
            Q.col(i) = -Q.col(i);
        }
    }
}

void thin_lq(const Eigen::MatrixXd& A, Eigen::MatrixXd& L, Eigen::MatrixXd& Q) {
    Eigen::MatrixXd Qt, Rt;
    thin_qr(A.transpose(), Qt, Rt);
    Q = Qt.transpose();
    L = Rt.transpose();
}

}  // namespace bstt
