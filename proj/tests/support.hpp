#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swa/dataset.hpp"
#include "swa/rng.hpp"

namespace swa::test {

/// n x p standard normal design with y = X beta + sigma z.
inline Dataset gaussian(Index n, Index p, const std::vector<double>& beta, double sigma, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    NormalSource normal;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(x.rows());
    for (Index j = 0; j < beta.size() && j < p; ++j) y += beta[j] * x.col(static_cast<Eigen::Index>(j));
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sigma * normal(rng);
    return Dataset(std::move(x), std::move(y));
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("swa_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace swa::test
