#include "smocklab/solver.hpp"

#include <Eigen/SparseCholesky>
#include <spdlog/spdlog.h>

#include <cmath>

namespace smocklab {

namespace {

bool newton_direction(const SparseMatrix& H, const Eigen::VectorXd& g, Eigen::VectorXd& step) {
  const int n = static_cast<int>(g.size());
  double scale = 0.0;
  for (int k = 0; k < H.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(H, k); it; ++it)
      if (it.row() == it.col()) scale = std::max(scale, std::abs(it.value()));
  if (scale == 0.0) scale = 1.0;

  SparseMatrix eye(n, n);
  eye.setIdentity();
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  double shift = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    SparseMatrix A = shift > 0.0 ? SparseMatrix(H + shift * eye) : H;
    ldlt.compute(A);
    if (ldlt.info() == Eigen::Success) {
      step = ldlt.solve(-g);
      if (ldlt.info() == Eigen::Success && step.allFinite() && g.dot(step) < 0.0) return true;
    }
    shift = shift == 0.0 ? 1e-10 * scale : shift * 10.0;
  }
  step = -g;
  return false;
}

}  // namespace

SolveReport minimize(const Objective& f, Eigen::VectorXd x0, const SolverOptions& opt) {
  SolveReport r;
  r.x = std::move(x0);
  Eigen::VectorXd g(f.dim());
  double energy = f.gradient(r.x, g);
  const bool use_energy_tol = f.nonnegative() && opt.energy_tol > 0.0;
  r.trace.push_back({0, energy, g.norm()});

  if (f.dim() == 0) {
    r.energy = energy;
    r.converged = true;
    r.status = "empty";
    return r;
  }

  int it = 0;
  for (; it < opt.max_iters; ++it) {
    const double gnorm = g.norm();
    if (gnorm < opt.grad_tol) {
      r.converged = true;
      r.status = "gradient";
      break;
    }
    if (use_energy_tol && energy < opt.energy_tol) {
      r.converged = true;
      r.status = "energy";
      break;
    }
    Eigen::VectorXd step;
    newton_direction(f.projected_hessian(r.x), g, step);

    const double slope = g.dot(step);
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    double trial_energy = energy;
    while (alpha > 1e-14) {
      trial = r.x + alpha * step;
      trial_energy = f.value(trial);
      if (std::isfinite(trial_energy) && trial_energy < energy && trial_energy <= energy + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No representable decrease left along a descent direction: the iterate
      // is stationary to working precision.
      r.status = "line-search";
      r.converged = gnorm < std::sqrt(opt.grad_tol);
      break;
    }
    r.x = std::move(trial);
    energy = f.gradient(r.x, g);
    r.trace.push_back({it + 1, energy, g.norm()});
  }
  if (it == opt.max_iters) {
    r.status = "max-iters";
    r.converged = false;
  }
  r.energy = energy;
  r.grad_norm = g.norm();
  r.iterations = it;
  if (!r.converged) spdlog::debug("solver stopped without convergence ({})", r.status);
  return r;
}

}  // namespace smocklab
