#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace invlint {

// Row-major so that row z of a map and row t of a trace matrix are contiguous.
template <typename T>
using Grid = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using Gridf = Grid<float>;
using Gridd = Grid<double>;

/// Invalid input, configuration or usage. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Failure while computing (divergence, singular system, NaN). Maps to exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SimulationDiverged : public NumericError {
public:
    using NumericError::NumericError;
};

class RankDeficient : public NumericError {
public:
    RankDeficient(long rank, long required)
        : NumericError("rank-deficient system: rank " + std::to_string(rank) + " < " +
                       std::to_string(required) + " unknowns (use alpha > 0)"),
          rank_(rank), required_(required) {}
    long rank() const { return rank_; }
    long required() const { return required_; }

private:
    long rank_;
    long required_;
};

} // namespace invlint
