#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace dopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Deterministic floating-point operation count, used as the hardware
// independent stand-in for compute time.
using Flops = std::uint64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class CapabilityError : public Error {
 public:
  CapabilityError(int node, std::string capability)
      : Error("node " + std::to_string(node) + " lacks capability '" + capability + "'"),
        node_(node),
        capability_(std::move(capability)) {}

  int node() const { return node_; }
  const std::string& capability() const { return capability_; }

 private:
  int node_;
  std::string capability_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(int iteration, const std::string& what)
      : Error("divergence at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

// Inner solver failure; carries the best iterate found.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual, Vector best = {})
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual),
        best_(std::move(best)) {}

  double residual() const { return residual_; }
  const Vector& best_iterate() const { return best_; }

 private:
  double residual_;
  Vector best_;
};

class MappingError : public Error {
 public:
  using Error::Error;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

namespace flops {
inline Flops axpy(Eigen::Index n) { return static_cast<Flops>(2 * n); }
inline Flops matvec(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<Flops>(2 * rows * cols);
}
inline Flops cholesky(Eigen::Index n) { return static_cast<Flops>(n * n * n / 3 + n * n); }
inline Flops chol_solve(Eigen::Index n) { return static_cast<Flops>(2 * n * n); }
}  // namespace flops

}  // namespace dopt
