#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "bstt/dictionary.hpp"

namespace bstt {

/// M sample points in R^d with targets and cached measurement matrices:
/// xi(k) has columns Psi(x^(m)_k) for m = 1..M (one p x M matrix per coordinate).
class SampleSet {
public:
    SampleSet(Eigen::MatrixXd points, Eigen::VectorXd targets, Dictionary dictionary);

    Eigen::Index sample_count() const { return points_.rows(); }
    Eigen::Index dimension() const { return points_.cols(); }
    const Eigen::MatrixXd& points() const { return points_; }
    const Eigen::VectorXd& targets() const { return targets_; }
    const Dictionary& dictionary() const { return dict_; }
    const Eigen::MatrixXd& xi(Eigen::Index k) const { return xi_.at(static_cast<std::size_t>(k)); }
    const std::vector<Eigen::MatrixXd>& xi_all() const { return xi_; }

private:
    Eigen::MatrixXd points_;
    Eigen::VectorXd targets_;
    Dictionary dict_;
    std::vector<Eigen::MatrixXd> xi_;
};

/// Reads `x_1,...,x_d,y` rows. Errors carry the offending line number; non-finite
/// values and ragged rows are rejected.
SampleSet ingest_csv(const std::string& path, const Dictionary& dictionary);

/// JSON form: {"x": [[...d values...], ...], "y": [...]}.
SampleSet ingest_json(const std::string& path, const Dictionary& dictionary);

SampleSet ingest_samples(const std::string& path, const std::string& format,
                         const Dictionary& dictionary);

/// Writes the CSV form with round-trip-exact (%.17g) floats and LF endings.
void dump_csv(const std::string& path, const Eigen::MatrixXd& points,
              const Eigen::VectorXd& targets);

}  // namespace bstt
