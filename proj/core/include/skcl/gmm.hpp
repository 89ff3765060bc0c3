#pragma once

#include <cmath>
#include <limits>

#include "skcl/types.hpp"

namespace skcl {

// Mixture hyperparameters of the sketch likelihood: weights on the simplex,
// per-cluster isotropic variance proxies tau_k = tr(R_k)/N, and the prior
// variance nu of each centroid coordinate (infinity means a flat prior).
struct GmmHyperparams {
  Vector alpha;
  Vector tau;
  double nu = std::numeric_limits<double>::infinity();

  Index clusters() const { return alpha.size(); }
  bool flat_prior() const { return std::isinf(nu); }

  static GmmHyperparams uniform(Index k, double tau, double nu = std::numeric_limits<double>::infinity());
};

// Throws skcl::Error unless alpha sums to 1 within 1e-12 (after which small
// negative round-off is still rejected), tau >= 0 and nu > 0.
void validate(const GmmHyperparams& hyper, double simplex_tol = 1e-12);

}  // namespace skcl
