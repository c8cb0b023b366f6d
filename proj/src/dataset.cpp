#include "grkbs/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace grkbs {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

TrainingSet load_dataset(const std::string& path, std::size_t input_dim, std::size_t output_dim) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv(line);
    const std::size_t expected_cols = input_dim + output_dim;
    for (std::size_t k = 0; k < expected_cols; ++k) {
        const std::string want = k < input_dim ? "x" + std::to_string(k + 1)
                                               : "y" + std::to_string(k - input_dim + 1);
        if (k >= header.size() || header[k] != want) {
            throw std::runtime_error("header mismatch at column " + std::to_string(k + 1));
        }
    }
    if (header.size() != expected_cols) {
        throw std::runtime_error("header mismatch at column " + std::to_string(expected_cols + 1));
    }

    TrainingSet data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != expected_cols) {
            throw std::runtime_error("dimension mismatch at line " + std::to_string(line_no));
        }
        Eigen::VectorXd x(static_cast<Eigen::Index>(input_dim));
        Eigen::VectorXd y(static_cast<Eigen::Index>(output_dim));
        for (std::size_t k = 0; k < expected_cols; ++k) {
            double value = 0.0;
            try {
                std::size_t used = 0;
                value = std::stod(fields[k], &used);
                if (used != fields[k].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw std::runtime_error("malformed row at line " + std::to_string(line_no));
            }
            if (k < input_dim) {
                x[static_cast<Eigen::Index>(k)] = value;
            } else {
                y[static_cast<Eigen::Index>(k - input_dim)] = value;
            }
        }
        data.xs.push_back(std::move(x));
        data.ys.push_back(std::move(y));
    }
    if (data.xs.empty()) throw std::runtime_error("dataset has no data rows: " + path);
    return data;
}

void write_dataset(const std::string& path, const TrainingSet& data) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);

    const auto n = data.xs[0].size();
    const auto m = data.ys[0].size();
    for (Eigen::Index k = 0; k < n; ++k) out << (k ? "," : "") << "x" << (k + 1);
    for (Eigen::Index k = 0; k < m; ++k) out << ",y" << (k + 1);
    out << '\n';

    char buf[64];
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.xs[i][k]);
            out << (k ? "," : "") << buf;
        }
        for (Eigen::Index k = 0; k < m; ++k) {
            std::snprintf(buf, sizeof(buf), ",%.17g", data.ys[i][k]);
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace grkbs
