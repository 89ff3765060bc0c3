#include "skcl/denoisers.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/LU>

namespace skcl {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  return a < 0.0 ? a + 2.0 * kPi : a;
}

struct ComponentTerm {
  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
};

// Mean and covariance of beta_l [cos theta_l; sin theta_l] with
// theta_l ~ N(g p_l, g^2 q_l).
ComponentTerm component_term(double alpha, double tau, double p, double q, double g) {
  const double g2 = g * g;
  const double beta = alpha * std::exp(-0.5 * g2 * tau);
  const double spread = std::exp(-g2 * q);
  const double a = g * p;
  ComponentTerm term;
  const double shrink = alpha * std::exp(-0.5 * g2 * (tau + q));
  term.mean << shrink * std::cos(a), shrink * std::sin(a);
  const double c2 = std::cos(2.0 * a);
  const double s2 = std::sin(2.0 * a);
  const double w = 0.5 * beta * beta * (1.0 - spread);
  term.cov << w * (1.0 - spread * c2), -w * spread * s2,  //
      -w * spread * s2, w * (1.0 + spread * c2);
  return term;
}

void check_pseudo(const PseudoPriorZ& pseudo, const GmmHyperparams& hyper) {
  if (pseudo.mean.size() != hyper.clusters() || pseudo.variance.size() != hyper.clusters()) {
    throw Error("pseudo-prior length does not match the number of clusters");
  }
}

}  // namespace

DenoiserStats& DenoiserStats::operator+=(const DenoiserStats& other) {
  theta_fallbacks += other.theta_fallbacks;
  curvature_clamps += other.curvature_clamps;
  variance_clamps += other.variance_clamps;
  negligible_components += other.negligible_components;
  return *this;
}

InterferenceMoments interference_moments(Index k, const PseudoPriorZ& pseudo, const GmmHyperparams& hyper, double g) {
  check_pseudo(pseudo, hyper);
  if (k < 0 || k >= hyper.clusters()) throw Error("cluster index out of range");
  InterferenceMoments im;
  for (Index l = 0; l < hyper.clusters(); ++l) {
    if (l == k) continue;
    const ComponentTerm term = component_term(hyper.alpha[l], hyper.tau[l], pseudo.mean[l], pseudo.variance[l], g);
    im.mu += term.mean;
    im.sigma += term.cov;
  }
  im.beta = hyper.alpha[k] * std::exp(-0.5 * g * g * hyper.tau[k]);
  return im;
}

GvmParams gvm_params(Complex y, const InterferenceMoments& im, const DenoiserOptions& options) {
  const double beta = im.beta;
  if (!(beta >= options.beta_floor)) throw NegligibleComponent();

  const Eigen::Matrix2d sigma = im.sigma + options.sigma_ridge * Eigen::Matrix2d::Identity();
  const Eigen::Vector2d d(y.real() - im.mu[0], y.imag() - im.mu[1]);

  // log N(d; beta u, Sigma) = beta u^T P d - beta^2/2 u^T P u + const, P = Sigma^-1.
  // Extended precision: near-singular Sigma makes kappa large, and the density
  // is only as accurate as kappa relative to its size.
  using ld = long double;
  const ld a = sigma(0, 0), b = sigma(0, 1), c = sigma(1, 1);
  const ld det = a * c - b * b;
  const ld p00 = c / det, p01 = -b / det, p11 = a / det;
  const ld dx = ld(y.real()) - ld(im.mu[0]);
  const ld dy = ld(y.imag()) - ld(im.mu[1]);
  const ld bt = beta;
  const ld lx = bt * (p00 * dx + p01 * dy);
  const ld ly = bt * (p01 * dx + p11 * dy);
  const ld c2 = -0.25L * bt * bt * (p00 - p11);
  const ld s2 = -0.5L * bt * bt * p01;

  GvmParams gvm;
  gvm.kappa1 = static_cast<double>(std::hypot(lx, ly));
  gvm.zeta1 = wrap_angle(static_cast<double>(std::atan2(ly, lx)));
  gvm.kappa2 = static_cast<double>(std::hypot(c2, s2));
  gvm.zeta2 = wrap_angle(static_cast<double>(0.5L * std::atan2(s2, c2)));

  StandardizedGvm& s = gvm.standardized;
  s.nu = d[0] / beta;
  s.nu_bar = d[1] / beta;
  s.sigma = std::sqrt(sigma(0, 0)) / beta;
  s.sigma_bar = std::sqrt(sigma(1, 1)) / beta;
  s.rho = sigma(0, 1) / std::sqrt(sigma(0, 0) * sigma(1, 1));
  return gvm;
}

GvmParams gvm_from_standardized(const StandardizedGvm& s) {
  if (!(std::abs(s.rho) < 1.0) || !(s.sigma > 0.0) || !(s.sigma_bar > 0.0)) {
    throw Error("standardized GvM parameters need |rho| < 1 and positive sigmas");
  }
  const double one_minus = 1.0 - s.rho * s.rho;
  const double ss = s.sigma * s.sigma_bar;
  const double a = -(s.rho * s.nu_bar / ss - s.nu / (s.sigma * s.sigma)) / one_minus;
  const double b = -(s.rho * s.nu / ss - s.nu_bar / (s.sigma_bar * s.sigma_bar)) / one_minus;
  const double c2 = -(1.0 / (s.sigma * s.sigma) - 1.0 / (s.sigma_bar * s.sigma_bar)) / (4.0 * one_minus);
  const double s2 = s.rho / (2.0 * one_minus * ss);

  GvmParams gvm;
  gvm.kappa1 = std::hypot(a, b);
  gvm.zeta1 = wrap_angle(std::atan2(b, a));
  gvm.kappa2 = std::hypot(c2, s2);
  gvm.zeta2 = wrap_angle(0.5 * std::atan2(s2, c2));
  gvm.standardized = s;
  return gvm;
}

double gvm_log_density(const GvmParams& gvm, double theta) {
  using ld = long double;
  const ld t = theta;
  return static_cast<double>(ld(gvm.kappa1) * std::cos(t - ld(gvm.zeta1)) +
                             ld(gvm.kappa2) * std::cos(2.0L * (t - ld(gvm.zeta2))));
}

double theta_log_posterior(const GvmParams& gvm, double prior_mean, double prior_var, double theta) {
  const double dev = theta - prior_mean;
  return gvm_log_density(gvm, theta) - 0.5 * dev * dev / prior_var;
}

double theta_log_posterior_d1(const GvmParams& gvm, double prior_mean, double prior_var, double theta) {
  return -gvm.kappa1 * std::sin(theta - gvm.zeta1) - 2.0 * gvm.kappa2 * std::sin(2.0 * (theta - gvm.zeta2)) -
         (theta - prior_mean) / prior_var;
}

double theta_log_posterior_d2(const GvmParams& gvm, double, double prior_var, double theta) {
  return -gvm.kappa1 * std::cos(theta - gvm.zeta1) - 4.0 * gvm.kappa2 * std::cos(2.0 * (theta - gvm.zeta2)) -
         1.0 / prior_var;
}

ThetaMap theta_map(const GvmParams& gvm, double prior_mean, double prior_var, const DenoiserOptions& options) {
  if (!(prior_var > 0.0)) throw Error("theta_map needs a positive prior variance");
  if (gvm.kappa1 == 0.0 && gvm.kappa2 == 0.0) return {prior_mean, false};

  const double half_width = kPi + 0.1;
  const double lo = prior_mean - half_width;
  const int points = std::max(options.grid_points, 2);
  const double step = 2.0 * half_width / (points - 1);

  auto d1 = [&](double t) { return theta_log_posterior_d1(gvm, prior_mean, prior_var, t); };

  bool found = false;
  double best_theta = prior_mean;
  double best_value = -std::numeric_limits<double>::infinity();
  double left = lo;
  double d_left = d1(left);
  for (int i = 1; i < points; ++i) {
    const double right = lo + step * i;
    const double d_right = d1(right);
    // a local maximum sits where the derivative goes from >= 0 to < 0
    if (d_left >= 0.0 && d_right < 0.0) {
      double a = left;
      double b = right;
      for (int it = 0; it < options.bisection_steps; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (d1(mid) >= 0.0) {
          a = mid;
        } else {
          b = mid;
        }
      }
      const double candidate = std::abs(d1(a)) <= std::abs(d1(b)) ? a : b;
      const double value = theta_log_posterior(gvm, prior_mean, prior_var, candidate);
      if (value > best_value) {
        best_value = value;
        best_theta = candidate;
        found = true;
      }
    }
    left = right;
    d_left = d_right;
  }
  if (!found) return {prior_mean, true};
  return {best_theta, false};
}

LaplaceMoments laplace_moments(const GvmParams& gvm, double prior_mean, double prior_var, double g,
                               const DenoiserOptions& options) {
  if (!(g > 0.0)) throw Error("laplace_moments needs a positive radius");
  const ThetaMap map = theta_map(gvm, prior_mean, prior_var, options);
  LaplaceMoments out;
  out.theta_fallback = map.fallback;
  out.mean = map.theta / g;

  const double g2 = g * g;
  const double upper = options.upper_factor * prior_var / g2;
  const double curvature = -theta_log_posterior_d2(gvm, prior_mean, prior_var, map.theta);
  if (!(curvature > 0.0)) {
    out.curvature_clamp = true;
    out.variance = options.q_min;
    return out;
  }
  double variance = 1.0 / (curvature * g2);
  if (variance < options.q_min || variance > upper || !std::isfinite(variance)) {
    out.variance_clamp = true;
    variance = std::isfinite(variance) ? std::clamp(variance, options.q_min, std::max(upper, options.q_min))
                                       : options.q_min;
  }
  out.variance = variance;
  return out;
}

PosteriorMomentsZ denoise_z(Complex y, const PseudoPriorZ& pseudo, const GmmHyperparams& hyper, double g,
                            const DenoiserOptions& options, DenoiserStats* stats) {
  check_pseudo(pseudo, hyper);
  const Index clusters = hyper.clusters();

  // Interference totals over all l; each k removes its own term, keeping the
  // per-measurement cost linear in K.
  Eigen::Vector2d mu_total = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma_total = Eigen::Matrix2d::Zero();
  std::vector<ComponentTerm> terms(static_cast<std::size_t>(clusters));
  for (Index l = 0; l < clusters; ++l) {
    terms[l] = component_term(hyper.alpha[l], hyper.tau[l], pseudo.mean[l], pseudo.variance[l], g);
    mu_total += terms[l].mean;
    sigma_total += terms[l].cov;
  }

  PosteriorMomentsZ out{Vector(clusters), Vector(clusters)};
  DenoiserStats local;
  for (Index k = 0; k < clusters; ++k) {
    const double p = pseudo.mean[k];
    const double q = pseudo.variance[k];
    InterferenceMoments im;
    if (clusters > 1) {
      im.mu = mu_total - terms[k].mean;
      im.sigma = sigma_total - terms[k].cov;
    }
    im.beta = hyper.alpha[k] * std::exp(-0.5 * g * g * hyper.tau[k]);

    if (!(im.beta >= options.beta_floor)) {
      ++local.negligible_components;
      out.mean[k] = p;
      out.variance[k] = q;
      continue;
    }
    const GvmParams gvm = gvm_params(y, im, options);
    const LaplaceMoments lm = laplace_moments(gvm, g * p, g * g * q, g, options);
    local.theta_fallbacks += lm.theta_fallback ? 1 : 0;
    local.curvature_clamps += lm.curvature_clamp ? 1 : 0;
    local.variance_clamps += lm.variance_clamp ? 1 : 0;

    if (std::isfinite(lm.mean) && std::isfinite(lm.variance)) {
      out.mean[k] = lm.mean;
      out.variance[k] = lm.variance;
    } else {
      ++local.theta_fallbacks;
      out.mean[k] = p;
      out.variance[k] = q;
    }
  }
  if (stats != nullptr) *stats += local;
  return out;
}

PosteriorMomentsC denoise_c(const Vector& rhat, const Vector& qr, double nu) {
  if (rhat.size() != qr.size()) throw Error("denoise_c: rhat and qr lengths differ");
  if ((qr.array() <= 0.0).any() || !(nu > 0.0)) throw Error("denoise_c needs positive qr and nu");
  PosteriorMomentsC out;
  if (std::isinf(nu)) {
    out.variance = qr;
    out.mean = rhat;
    return out;
  }
  out.variance = (1.0 / nu + qr.array().inverse()).inverse().matrix();
  out.mean = (out.variance.array() / qr.array() * rhat.array()).matrix();
  return out;
}

}  // namespace skcl
