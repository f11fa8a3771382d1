#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

namespace bstt {

/// Univariate function dictionary Psi : R -> R^p. Entry k (0-based) must be a
/// polynomial of degree exactly k; custom dictionaries are checked against this
/// grading at registration.
class Dictionary {
public:
    enum class Kind { Monomial, Legendre, Custom };

    static Dictionary monomial(Eigen::Index p);
    /// Unnormalized Legendre polynomials, P_k(1) = 1, via the three-term recurrence.
    static Dictionary legendre(Eigen::Index p);
    static Dictionary custom(Eigen::Index p, std::function<Eigen::VectorXd(double)> eval,
                             std::string name);

    Kind kind() const { return kind_; }
    Eigen::Index size() const { return p_; }
    const std::string& name() const { return name_; }

    Eigen::VectorXd operator()(double x) const { return eval_(x); }

    /// p x M matrix of columns Psi(x_m).
    Eigen::MatrixXd evaluate_all(const Eigen::VectorXd& xs) const;

private:
    Dictionary(Kind kind, Eigen::Index p, std::function<Eigen::VectorXd(double)> eval,
               std::string name);

    Kind kind_;
    Eigen::Index p_;
    std::function<Eigen::VectorXd(double)> eval_;
    std::string name_;
};

Dictionary dictionary_by_name(const std::string& name, Eigen::Index p);

}  // namespace bstt
