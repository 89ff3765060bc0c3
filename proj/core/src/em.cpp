#include "skcl/em.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace skcl {

namespace {

void check_params(const Vector& alpha, const Vector& tau, const EmWorkspace& ws) {
  if (alpha.size() != tau.size()) throw Error("alpha and tau lengths differ");
  ws.validate(alpha.size());
  if ((alpha.array() < 0.0).any() || std::abs(alpha.sum() - 1.0) > 1e-9) {
    throw Error("em: alpha must lie on the simplex");
  }
  if ((tau.array() < 0.0).any()) throw Error("em: tau must be nonnegative");
}

// Terms that depend only on the workspace: E exp(j g z) and 1 - |E exp(j g z)|^2.
struct MomentCache {
  Eigen::MatrixXcd phi;
  Matrix spread;
  Vector g2;

  explicit MomentCache(const EmWorkspace& ws) : phi(ws.zhat.rows(), ws.zhat.cols()), spread(ws.zhat.rows(), ws.zhat.cols()) {
    g2 = ws.g.cwiseProduct(ws.g);
    for (Index k = 0; k < ws.zhat.cols(); ++k) {
      for (Index m = 0; m < ws.zhat.rows(); ++m) {
        const double decay = std::exp(-0.5 * g2[m] * ws.qz(m, k));
        const double phase = ws.g[m] * ws.zhat(m, k);
        phi(m, k) = Complex(decay * std::cos(phase), decay * std::sin(phase));
        spread(m, k) = -std::expm1(-g2[m] * ws.qz(m, k));
      }
    }
  }
};

// Objective and (optionally) gradient in one pass over the measurements.
double evaluate(const Vector& alpha, const Vector& tau, const EmWorkspace& ws, const MomentCache& cache,
                EmGradient* grad) {
  const Index clusters = alpha.size();
  const Index measurements = ws.y.size();
  if (grad != nullptr) {
    grad->alpha = Vector::Zero(clusters);
    grad->tau = Vector::Zero(clusters);
  }
  std::vector<double> b(static_cast<std::size_t>(clusters));
  double total = 0.0;
  for (Index m = 0; m < measurements; ++m) {
    const double g2 = cache.g2[m];
    Complex model = 0.0;
    double value = 0.0;
    for (Index k = 0; k < clusters; ++k) {
      b[k] = std::exp(-0.5 * g2 * tau[k]);
      model += (alpha[k] * b[k]) * cache.phi(m, k);
      value += alpha[k] * alpha[k] * b[k] * b[k] * cache.spread(m, k);
    }
    const Complex r = ws.y[m] - model;
    total += std::norm(r) + value;
    if (grad == nullptr) continue;
    for (Index k = 0; k < clusters; ++k) {
      // derivative of -(|r|^2 + sum a^2 b^2 s) with respect to the product alpha_k b_k
      const double partial_ab = 2.0 * (std::conj(r) * cache.phi(m, k)).real() - 2.0 * alpha[k] * b[k] * cache.spread(m, k);
      grad->alpha[k] += partial_ab * b[k];
      grad->tau[k] += partial_ab * alpha[k] * (-0.5 * g2 * b[k]);
    }
  }
  return -total;
}

}  // namespace

void EmWorkspace::validate(Index clusters) const {
  const Index m = y.size();
  if (g.size() != m || zhat.rows() != m || qz.rows() != m || zhat.cols() != clusters || qz.cols() != clusters) {
    throw Error("em workspace shapes are inconsistent");
  }
  if ((qz.array() < 0.0).any()) throw Error("em workspace has negative qz");
}

double em_objective(const Vector& alpha, const Vector& tau, const EmWorkspace& ws) {
  check_params(alpha, tau, ws);
  return evaluate(alpha, tau, ws, MomentCache(ws), nullptr);
}

EmGradient em_gradient(const Vector& alpha, const Vector& tau, const EmWorkspace& ws) {
  check_params(alpha, tau, ws);
  EmGradient grad;
  evaluate(alpha, tau, ws, MomentCache(ws), &grad);
  return grad;
}

Vector project_simplex(const Vector& v) {
  const Index n = v.size();
  if (n < 1) throw Error("project_simplex needs a nonempty vector");
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Index i = 0; i < n; ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  Vector out = (v.array() - theta).max(0.0).matrix();
  // renormalize away round-off so the sum is 1 to machine precision
  const double sum = out.sum();
  if (sum > 0.0) out /= sum;
  return out;
}

EmUpdate update_hyperparams(const Vector& alpha, const Vector& tau, double nu, const EmWorkspace& ws,
                            const Matrix& chat, const Vector& qc, const EmOptions& options) {
  check_params(alpha, tau, ws);
  const MomentCache cache(ws);
  EmUpdate out;
  out.alpha = alpha;
  out.tau = tau;
  out.nu = nu;
  EmGradient grad;
  double current = evaluate(alpha, tau, ws, cache, &grad);
  out.objective_before = current;
  out.objective_trace.push_back(current);

  // Each line search starts from twice the last accepted step (never above
  // initial_step) and halves until the Armijo condition holds.
  double start_step = options.initial_step;
  for (int step_index = 0; step_index < options.max_steps; ++step_index) {
    double step = start_step;
    bool accepted = false;
    for (int h = 0; h < options.max_halvings; ++h, step *= 0.5) {
      const Vector alpha_try = project_simplex(out.alpha + step * grad.alpha);
      const Vector tau_try = (out.tau + step * grad.tau).cwiseMax(options.tau_min);
      const double predicted = grad.alpha.dot(alpha_try - out.alpha) + grad.tau.dot(tau_try - out.tau);
      if (!(predicted > 0.0)) break;
      EmGradient grad_try;
      const double value = evaluate(alpha_try, tau_try, ws, cache, &grad_try);
      if (std::isfinite(value) && value > current && value >= current + options.armijo * predicted) {
        const double gain = value - current;
        out.alpha = alpha_try;
        out.tau = tau_try;
        grad = std::move(grad_try);
        current = value;
        out.objective_trace.push_back(value);
        ++out.accepted_steps;
        accepted = true;
        start_step = std::min(options.initial_step, 2.0 * step);
        if (gain < options.min_improvement) step_index = options.max_steps;
        break;
      }
    }
    if (!accepted) break;
  }
  out.objective_after = current;

  if (options.learn_nu) {
    const Index n = chat.rows();
    const Index k = chat.cols();
    if (qc.size() != k) throw Error("em: qc length does not match centroid columns");
    const double second_moment = chat.squaredNorm() + static_cast<double>(n) * qc.sum();
    out.nu = std::max(second_moment / static_cast<double>(n * k), 1e-300);
  }
  return out;
}

}  // namespace skcl
