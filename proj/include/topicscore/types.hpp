#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace topicscore {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/**
 * @brief Invalid configuration or malformed input supplied by the caller.
 *
 * The command line tool maps this to exit code 2.
 */
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/**
 * @brief A numerical routine could not produce a trustworthy result, e.g. a
 * singular value tie or a non-converged factorization.
 *
 * The command line tool maps this to exit code 3.
 */
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace topicscore
