#include "bstt/sample_set.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace bstt {

SampleSet::SampleSet(Eigen::MatrixXd points, Eigen::VectorXd targets, Dictionary dictionary)
    : points_(std::move(points)), targets_(std::move(targets)), dict_(std::move(dictionary)) {
    if (points_.rows() < 1) throw std::invalid_argument("sample set: need at least one sample");
    if (points_.rows() != targets_.size())
        throw std::invalid_argument("sample set: point/target count mismatch");
    if (!points_.allFinite() || !targets_.allFinite())
        throw std::invalid_argument("sample set: non-finite values");
    xi_.reserve(static_cast<std::size_t>(points_.cols()));
    for (Eigen::Index k = 0; k < points_.cols(); ++k)
        xi_.push_back(dict_.evaluate_all(points_.col(k)));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

SampleSet ingest_csv(const std::string& path, const Dictionary& dictionary) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");

    const auto header = split_csv_line(line);
    if (header.size() < 2 || header.back() != "y")
        throw std::runtime_error(path + ":1: header must be x_1,...,x_d,y");
    const Eigen::Index d = static_cast<Eigen::Index>(header.size()) - 1;
    for (Eigen::Index k = 0; k < d; ++k)
        if (header[static_cast<std::size_t>(k)] != "x_" + std::to_string(k + 1))
            throw std::runtime_error(path + ":1: header must be x_1,...,x_d,y");

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<Eigen::Index>(fields.size()) != d + 1)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(d + 1) + " values, got " +
                                     std::to_string(fields.size()));
        std::vector<double> row;
        for (const auto& f : fields) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(f, &used);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": cannot parse '" + f + "'");
            }
            if (used != f.size())
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": cannot parse '" + f + "'");
            if (!std::isfinite(v))
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-finite value");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");

    Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.size()), d);
    Eigen::VectorXd targets(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t m = 0; m < rows.size(); ++m) {
        for (Eigen::Index k = 0; k < d; ++k) points(static_cast<Eigen::Index>(m), k) = rows[m][static_cast<std::size_t>(k)];
        targets(static_cast<Eigen::Index>(m)) = rows[m][static_cast<std::size_t>(d)];
    }
    return SampleSet(std::move(points), std::move(targets), dictionary);
}

SampleSet ingest_json(const std::string& path, const Dictionary& dictionary) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    const auto x = j.at("x").get<std::vector<std::vector<double>>>();
    const auto y = j.at("y").get<std::vector<double>>();
    if (x.empty() || x.size() != y.size())
        throw std::runtime_error(path + ": x/y row counts disagree");
    const Eigen::Index d = static_cast<Eigen::Index>(x.front().size());
    Eigen::MatrixXd points(static_cast<Eigen::Index>(x.size()), d);
    Eigen::VectorXd targets(static_cast<Eigen::Index>(y.size()));
    for (std::size_t m = 0; m < x.size(); ++m) {
        if (static_cast<Eigen::Index>(x[m].size()) != d)
            throw std::runtime_error(path + ": row " + std::to_string(m + 1) + " has inconsistent dimension");
        for (Eigen::Index k = 0; k < d; ++k) points(static_cast<Eigen::Index>(m), k) = x[m][static_cast<std::size_t>(k)];
        targets(static_cast<Eigen::Index>(m)) = y[m];
    }
    return SampleSet(std::move(points), std::move(targets), dictionary);
}

SampleSet ingest_samples(const std::string& path, const std::string& format,
                         const Dictionary& dictionary) {
    if (format == "csv") return ingest_csv(path, dictionary);
    if (format == "json") return ingest_json(path, dictionary);
    throw std::invalid_argument("ingest: unknown format '" + format + "'");
}

void dump_csv(const std::string& path, const Eigen::MatrixXd& points,
              const Eigen::VectorXd& targets) {
    if (points.rows() != targets.size())
        throw std::invalid_argument("dump_csv: point/target count mismatch");
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (Eigen::Index k = 0; k < points.cols(); ++k) out << "x_" << (k + 1) << ",";
    out << "y\n";
    char buf[64];
    for (Eigen::Index m = 0; m < points.rows(); ++m) {
        for (Eigen::Index k = 0; k < points.cols(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", points(m, k));
            out << buf << ",";
        }
        std::snprintf(buf, sizeof(buf), "%.17g", targets(m));
        out << buf << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace bstt
