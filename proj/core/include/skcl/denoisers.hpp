#pragma once

#include <Eigen/Core>

#include "skcl/gmm.hpp"
#include "skcl/types.hpp"

namespace skcl {

// Gaussian pseudo-prior z_m ~ N(mean, Diag(variance)) handed to the output denoiser.
struct PseudoPriorZ {
  Vector mean;
  Vector variance;
};

// Gaussian approximation of the interference from the other clusters,
//   [Re y; Im y] | theta_k ~ N(beta_k [cos theta_k; sin theta_k] + mu_k, Sigma_k).
struct InterferenceMoments {
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
  double beta = 0.0;
};

struct StandardizedGvm {
  double nu = 0.0;
  double nu_bar = 0.0;
  double sigma = 1.0;
  double sigma_bar = 1.0;
  double rho = 0.0;
};

// Generalized von Mises likelihood on the phase theta:
//   exp(kappa1 cos(theta - zeta1) + kappa2 cos(2 (theta - zeta2))).
struct GvmParams {
  double kappa1 = 0.0;
  double zeta1 = 0.0;
  double kappa2 = 0.0;
  double zeta2 = 0.0;
  StandardizedGvm standardized;
};

struct PosteriorMomentsZ {
  Vector mean;
  Vector variance;
};

struct PosteriorMomentsC {
  Vector mean;
  Vector variance;
};

struct DenoiserOptions {
  double q_min = 1e-12;
  // posterior variance never exceeds this multiple of the prior variance
  double upper_factor = 10.0;
  // ridge added to Sigma_k before inversion
  double sigma_ridge = 1e-10;
  double beta_floor = 1e-300;
  int grid_points = 64;
  int bisection_steps = 60;
};

// Counts of the documented fallbacks; summed over calls by the engine.
struct DenoiserStats {
  Index theta_fallbacks = 0;
  Index curvature_clamps = 0;
  Index variance_clamps = 0;
  Index negligible_components = 0;

  DenoiserStats& operator+=(const DenoiserStats& other);
};

class NegligibleComponent : public Error {
 public:
  NegligibleComponent() : Error("negligible component: beta underflow") {}
};

InterferenceMoments interference_moments(Index k, const PseudoPriorZ& pseudo, const GmmHyperparams& hyper, double g);

// GvM parameters of the likelihood on theta_k. Throws NegligibleComponent when
// beta_k underflows.
GvmParams gvm_params(Complex y, const InterferenceMoments& im, const DenoiserOptions& options = {});

// The same map written in standardized coordinates (nu, nu_bar, sigma, sigma_bar, rho).
GvmParams gvm_from_standardized(const StandardizedGvm& s);

// Unnormalized log GvM density at theta.
double gvm_log_density(const GvmParams& gvm, double theta);

// Unnormalized log posterior of theta under a N(prior_mean, prior_var) prior,
// and its first two derivatives.
double theta_log_posterior(const GvmParams& gvm, double prior_mean, double prior_var, double theta);
double theta_log_posterior_d1(const GvmParams& gvm, double prior_mean, double prior_var, double theta);
double theta_log_posterior_d2(const GvmParams& gvm, double prior_mean, double prior_var, double theta);

struct ThetaMap {
  double theta = 0.0;
  bool fallback = false;
};

// MAP of the theta posterior: derivative sign changes on a uniform grid are
// refined by bisection and the best local maximum is kept. The GvM term is
// 2pi-periodic, so the MAP lies within pi of the prior mean; the grid spans that
// interval plus a small margin.
ThetaMap theta_map(const GvmParams& gvm, double prior_mean, double prior_var, const DenoiserOptions& options = {});

struct LaplaceMoments {
  double mean = 0.0;
  double variance = 0.0;
  bool theta_fallback = false;
  bool curvature_clamp = false;
  bool variance_clamp = false;
};

// Laplace approximation around the MAP, mapped back from theta = g z to z.
LaplaceMoments laplace_moments(const GvmParams& gvm, double prior_mean, double prior_var, double g,
                               const DenoiserOptions& options = {});

PosteriorMomentsZ denoise_z(Complex y, const PseudoPriorZ& pseudo, const GmmHyperparams& hyper, double g,
                            const DenoiserOptions& options = {}, DenoiserStats* stats = nullptr);

// Posterior of c_n under the prior N(0, nu I) and pseudo-measurement r_n = c_n + v_n.
PosteriorMomentsC denoise_c(const Vector& rhat, const Vector& qr, double nu);

}  // namespace skcl
