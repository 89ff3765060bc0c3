#include "skcl/gmm.hpp"

#include <cmath>
#include <string>

namespace skcl {

GmmHyperparams GmmHyperparams::uniform(Index k, double tau, double nu) {
  GmmHyperparams hyper;
  hyper.alpha = Vector::Constant(k, 1.0 / static_cast<double>(k));
  hyper.tau = Vector::Constant(k, tau);
  hyper.nu = nu;
  return hyper;
}

void validate(const GmmHyperparams& hyper, double simplex_tol) {
  const Index k = hyper.alpha.size();
  if (k < 1) throw Error("hyperparameters need at least one cluster");
  if (hyper.tau.size() != k) throw Error("alpha and tau lengths differ");
  if (!hyper.alpha.allFinite() || !hyper.tau.allFinite()) {
    throw Error("hyperparameters contain non-finite values");
  }
  if ((hyper.alpha.array() < 0.0).any()) throw Error("alpha has negative entries");
  if (std::abs(hyper.alpha.sum() - 1.0) > simplex_tol) {
    throw Error("alpha does not sum to one (sum = " + std::to_string(hyper.alpha.sum()) + ")");
  }
  if ((hyper.tau.array() < 0.0).any()) throw Error("tau has negative entries");
  if (!(hyper.nu > 0.0)) throw Error("nu must be positive");
}

}  // namespace skcl
