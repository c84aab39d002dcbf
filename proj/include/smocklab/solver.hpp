#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <string>
#include <vector>

namespace smocklab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Smooth objective over a flat variable vector with a positive-semidefinite
/// Hessian approximation.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dim() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  /// Fills g and returns the value.
  virtual double gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const = 0;
  virtual SparseMatrix projected_hessian(const Eigen::VectorXd& x) const = 0;
  /// When true, energy below energy_tol counts as converged.
  virtual bool nonnegative() const { return true; }
};

struct SolverOptions {
  int max_iters = 1000;
  double grad_tol = 1e-10;
  double energy_tol = 1e-8;  // ignored when <= 0 or the objective may go negative
};

struct TraceRecord {
  int iteration = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
};

struct SolveReport {
  Eigen::VectorXd x;
  double energy = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string status;
  std::vector<TraceRecord> trace;
};

/// Projected Newton with Armijo backtracking. Deterministic for a given x0.
SolveReport minimize(const Objective& f, Eigen::VectorXd x0, const SolverOptions& opt);

}  // namespace smocklab
