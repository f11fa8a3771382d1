#include "bstt/dictionary.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

namespace bstt {

namespace {

// Fit the unique interpolating polynomial of degree <= p on p+1 Chebyshev nodes
// and return its monomial coefficients. Exact for polynomials of degree <= p.
Eigen::MatrixXd polynomial_coefficients(const std::function<Eigen::VectorXd(double)>& eval,
                                        Eigen::Index p) {
    const Eigen::Index n = p + 1;
    Eigen::VectorXd nodes(n);
    for (Eigen::Index i = 0; i < n; ++i)
        nodes(i) = std::cos(M_PI * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n)));
    Eigen::MatrixXd vand(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double pw = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            vand(i, j) = pw;
            pw *= nodes(i);
        }
    }
    Eigen::MatrixXd samples(n, p);
    for (Eigen::Index i = 0; i < n; ++i) samples.row(i) = eval(nodes(i)).transpose();
    return vand.partialPivLu().solve(samples);  // (n coeffs) x (p entries)
}

void check_degree_grading(const std::function<Eigen::VectorXd(double)>& eval, Eigen::Index p,
                          const std::string& name) {
    Eigen::MatrixXd coeff = polynomial_coefficients(eval, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const double scale = coeff.col(k).cwiseAbs().maxCoeff();
        if (scale == 0.0 || std::abs(coeff(k, k)) < 1e-10 * scale)
            throw std::invalid_argument("dictionary '" + name + "': entry " + std::to_string(k + 1) +
                                        " does not have degree " + std::to_string(k));
        for (Eigen::Index j = k + 1; j <= p; ++j)
            if (std::abs(coeff(j, k)) > 1e-10 * scale)
                throw std::invalid_argument("dictionary '" + name + "': entry " +
                                            std::to_string(k + 1) + " exceeds degree " +
                                            std::to_string(k));
    }
}

}  // namespace

Dictionary::Dictionary(Kind kind, Eigen::Index p, std::function<Eigen::VectorXd(double)> eval,
                       std::string name)
    : kind_(kind), p_(p), eval_(std::move(eval)), name_(std::move(name)) {
    if (p_ < 1) throw std::invalid_argument("dictionary size must be positive");
}

Dictionary Dictionary::monomial(Eigen::Index p) {
    return Dictionary(Kind::Monomial, p,
                      [p](double x) {
                          Eigen::VectorXd v(p);
                          double pw = 1.0;
                          for (Eigen::Index k = 0; k < p; ++k) {
                              v(k) = pw;
                              pw *= x;
                          }
                          return v;
                      },
                      "monomial");
}

Dictionary Dictionary::legendre(Eigen::Index p) {
    return Dictionary(Kind::Legendre, p,
                      [p](double x) {
                          Eigen::VectorXd v(p);
                          v(0) = 1.0;
                          if (p > 1) v(1) = x;
                          for (Eigen::Index k = 1; k + 1 < p; ++k)
                              v(k + 1) = ((2.0 * static_cast<double>(k) + 1.0) * x * v(k) -
                                          static_cast<double>(k) * v(k - 1)) /
                                         (static_cast<double>(k) + 1.0);
                          return v;
                      },
                      "legendre");
}

Dictionary Dictionary::custom(Eigen::Index p, std::function<Eigen::VectorXd(double)> eval,
                              std::string name) {
    check_degree_grading(eval, p, name);
    return Dictionary(Kind::Custom, p, std::move(eval), std::move(name));
}

Eigen::MatrixXd Dictionary::evaluate_all(const Eigen::VectorXd& xs) const {
    Eigen::MatrixXd m(p_, xs.size());
    for (Eigen::Index j = 0; j < xs.size(); ++j) m.col(j) = eval_(xs(j));
    return m;
}

Dictionary dictionary_by_name(const std::string& name, Eigen::Index p) {
    if (name == "monomial") return Dictionary::monomial(p);
    if (name == "legendre") return Dictionary::legendre(p);
    throw std::invalid_argument("unknown dictionary '" + name + "'");
}

}  // namespace bstt
