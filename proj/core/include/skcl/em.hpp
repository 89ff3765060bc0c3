#pragma once

#include <vector>

#include "skcl/types.hpp"

namespace skcl {

// Posterior summaries of z_m from the output denoiser, plus the measurements.
// The Dirac likelihood is smoothed by a Gaussian of variance epsilon; epsilon
// only scales the objective, so it is never materialized.
struct EmWorkspace {
  const Matrix& zhat;  // M x K
  const Matrix& qz;    // M x K
  const ComplexVector& y;
  const Vector& g;

  void validate(Index clusters) const;
};

// J(alpha, tau) = -sum_m E |y_m - sum_k alpha_k exp(j g_m z_mk - g_m^2 tau_k / 2)|^2
// with z_m ~ N(zhat_m, Diag(qz_m)), evaluated in closed form.
double em_objective(const Vector& alpha, const Vector& tau, const EmWorkspace& ws);

struct EmGradient {
  Vector alpha;
  Vector tau;
};

EmGradient em_gradient(const Vector& alpha, const Vector& tau, const EmWorkspace& ws);

// Euclidean projection onto {a : a >= 0, sum a = 1}.
Vector project_simplex(const Vector& v);

struct EmOptions {
  int max_steps = 50;
  double min_improvement = 1e-9;
  double armijo = 1e-4;
  double initial_step = 1.0;
  int max_halvings = 60;
  double tau_min = 0.0;
  bool learn_nu = false;
};

struct EmUpdate {
  Vector alpha;
  Vector tau;
  double nu = 0.0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  int accepted_steps = 0;
  // objective after each accepted step, starting with the initial value
  std::vector<double> objective_trace;
};

// Projected-gradient ascent on J with Armijo backtracking, followed by the
// Gaussian-prior nu update when enabled. chat is N x K and qc holds the
// per-cluster posterior variances of the centroid coordinates.
EmUpdate update_hyperparams(const Vector& alpha, const Vector& tau, double nu, const EmWorkspace& ws,
                            const Matrix& chat, const Vector& qc, const EmOptions& options = {});

}  // namespace skcl
