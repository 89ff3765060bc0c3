// Acceptance suite: one PASS/FAIL line per criterion. With no arguments every
// criterion runs; otherwise only the listed numbers. Exit status is nonzero when
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "skcl/bench.hpp"
#include "skcl/denoisers.hpp"
#include "skcl/em.hpp"
#include "skcl/engine.hpp"
#include "skcl/hungarian.hpp"
#include "skcl/kmeans.hpp"
#include "skcl/sketch.hpp"
#include "skcl/synth.hpp"

using namespace skcl;

namespace {

constexpr double kPi = 3.141592653589793;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double max_matched_error(const Centroids& est, const Centroids& truth) {
  const Index k = truth.cols();
  Matrix cost(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) cost(i, j) = (est.col(i) - truth.col(j)).norm();
  }
  const oracle::BruteAssignment best = oracle::brute_force_assignment(cost);
  double worst = 0.0;
  for (Index i = 0; i < k; ++i) worst = std::max(worst, cost(i, best.perm[i]));
  return worst;
}

Outcome sketch_concentration() {
  const Index k = 3, n = 10, m = 200;
  std::vector<double> ratios;
  for (int seed = 0; seed < 10; ++seed) {
    const SyntheticDataset d = gen_gmm({k, n, 40000, 0, static_cast<std::uint64_t>(1000 + seed)});
    const FrequencyMatrix f = draw_frequencies(n, m, RadiusLaw::adapted_radius, estimate_scale(d.train, seed), 2000 + seed);
    const ComplexVector truth = analytic_sketch(d.means, GmmHyperparams::uniform(k, 1.0), f);
    const double small = (compute_sketch(d.train.leftCols(10000), f).values - truth).cwiseAbs().maxCoeff();
    const double large = (compute_sketch(d.train, f).values - truth).cwiseAbs().maxCoeff();
    ratios.push_back(large / small);
  }
  const double med = median(ratios);
  return {med <= 0.55, fmt("median sup-error ratio T=4e4 vs T=1e4 = %.3f (bound 0.55)", med)};
}

Outcome gvm_identity() {
  Rng rng(2);
  DenoiserOptions exact;
  exact.sigma_ridge = 0.0;
  double worst = 0.0;
  for (int instance = 0; instance < 1000; ++instance) {
    const Index clusters = 2 + static_cast<Index>(rng.below(4));
    const oracle::DenoiserInstance in = oracle::random_denoiser_instance(clusters, rng);
    const Index k = static_cast<Index>(rng.below(static_cast<std::uint64_t>(clusters)));
    const InterferenceMoments im = interference_moments(k, in.pseudo, in.hyper, in.g);
    const GvmParams gvm = gvm_params(in.y, im, exact);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < 1024; ++i) {
      const double t = -kPi + 2.0 * kPi * i / 1024.0;
      const double diff = gvm_log_density(gvm, t) - oracle::constrained_gaussian_log(in.y, im.mu, im.sigma, im.beta, t);
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    worst = std::max(worst, hi - lo);
  }
  return {worst < 1e-9, fmt("worst grid max-min of the log-density difference = %.3g over 1000 inputs", worst)};
}

Outcome moment_oracle() {
  Rng rng(3);
  int failures = 0;
  double worst = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    const Index clusters = 2 + static_cast<Index>(rng.below(4));
    const oracle::DenoiserInstance in = oracle::random_denoiser_instance(clusters, rng);
    const Index k = static_cast<Index>(rng.below(static_cast<std::uint64_t>(clusters)));
    const InterferenceMoments im = interference_moments(k, in.pseudo, in.hyper, in.g);
    const oracle::MomentEstimate mc = oracle::mc_interference(k, in.hyper.alpha, in.hyper.tau, in.pseudo.mean,
                                                              in.pseudo.variance, in.g, 1000000, rng);
    double z = 0.0;
    for (int i = 0; i < 2; ++i) z = std::max(z, std::abs(im.mu[i] - mc.mean[i]) / mc.mean_se[i]);
    for (int i = 0; i < 2; ++i) {
      for (int j = i; j < 2; ++j) z = std::max(z, std::abs(im.sigma(i, j) - mc.cov(i, j)) / mc.cov_se(i, j));
    }
    failures += z > 4.0 ? 1 : 0;
    worst = std::max(worst, z);
  }
  return {failures == 0, fmt("%d/100 instances outside 4 SE; largest deviation %.2f SE", failures, worst)};
}

Outcome laplace_vs_quadrature() {
  Rng rng(4);
  int accepted = 0, mean_fail = 0, var_fail = 0, skipped = 0;
  std::vector<double> mean_err, var_err;
  while (accepted < 500) {
    const oracle::DenoiserInstance in = oracle::random_denoiser_instance(3, rng);
    const Index k = static_cast<Index>(rng.below(3));
    const GvmParams gvm = gvm_params(in.y, interference_moments(k, in.pseudo, in.hyper, in.g));
    const double prior_mean = in.g * in.pseudo.mean[k];
    const double prior_var = in.g * in.g * in.pseudo.variance[k];
    const oracle::QuadratureMoments quad = oracle::quadrature_theta(gvm, prior_mean, prior_var, 100000);
    if (quad.local_maxima != 1) {
      ++skipped;
      continue;
    }
    ++accepted;
    const LaplaceMoments lap = laplace_moments(gvm, prior_mean, prior_var, in.g);
    const double zq = quad.mean / in.g;
    const double qq = quad.var / (in.g * in.g);
    const double em = std::abs(lap.mean - zq) / std::max(std::abs(zq), std::sqrt(qq));
    const double ev = std::abs(lap.variance - qq) / qq;
    mean_fail += em > 0.05 ? 1 : 0;
    var_fail += ev > 0.05 ? 1 : 0;
    mean_err.push_back(em);
    var_err.push_back(ev);
  }
  return {mean_fail == 0 && var_fail == 0,
          fmt("500 unimodal instances (%d multimodal skipped): mean off by >5%% in %d, variance in %d; "
              "median rel. error mean %.3f variance %.3f",
              skipped, mean_fail, var_fail, median(mean_err), median(var_err))};
}

struct EmInstance {
  Matrix zhat, qz;
  ComplexVector y;
  Vector g, alpha, tau;
  EmWorkspace ws() const { return {zhat, qz, y, g}; }
};

EmInstance random_em_instance(Rng& rng) {
  const Index m = 5 + static_cast<Index>(rng.below(36));
  const Index k = 1 + static_cast<Index>(rng.below(5));
  EmInstance in;
  in.zhat = Matrix(m, k);
  in.qz = Matrix(m, k);
  in.y = ComplexVector(m);
  in.g = Vector(m);
  for (Index i = 0; i < m; ++i) {
    in.g[i] = oracle::uniform(rng, 0.3, 2.0);
    in.y[i] = Complex(0.5 * rng.normal(), 0.5 * rng.normal());
    for (Index j = 0; j < k; ++j) {
      in.zhat(i, j) = rng.normal();
      in.qz(i, j) = oracle::uniform(rng, 0.0, 0.5);
    }
  }
  in.alpha = oracle::random_simplex(k, rng);
  in.tau = Vector(k);
  for (Index j = 0; j < k; ++j) in.tau[j] = oracle::uniform(rng, 0.05, 1.5);
  return in;
}

// The objective written directly from its definition, valid off the simplex.
double direct_objective(const EmInstance& in, const Vector& alpha, const Vector& tau) {
  double total = 0.0;
  for (Index m = 0; m < in.y.size(); ++m) {
    const double g2 = in.g[m] * in.g[m];
    Complex model = 0.0;
    double spread = 0.0;
    for (Index k = 0; k < alpha.size(); ++k) {
      const double b = std::exp(-0.5 * g2 * tau[k]);
      model += alpha[k] * b * std::exp(Complex(-0.5 * g2 * in.qz(m, k), in.g[m] * in.zhat(m, k)));
      spread += alpha[k] * alpha[k] * b * b * (1.0 - std::exp(-g2 * in.qz(m, k)));
    }
    total -= std::norm(in.y[m] - model) + spread;
  }
  return total;
}

Outcome em_gradient_check() {
  Rng rng(5);
  double worst = 0.0;
  int non_increasing = 0, accepted = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const EmInstance in = random_em_instance(rng);
    const EmGradient grad = em_gradient(in.alpha, in.tau, in.ws());
    const Index k = in.alpha.size();
    Vector analytic(2 * k), numeric(2 * k);
    for (Index j = 0; j < k; ++j) {
      analytic[j] = grad.alpha[j];
      analytic[k + j] = grad.tau[j];
      numeric[j] = oracle::central_difference([&](const Vector& a) { return direct_objective(in, a, in.tau); },
                                              in.alpha, j, 1e-6);
      numeric[k + j] = oracle::central_difference([&](const Vector& t) { return direct_objective(in, in.alpha, t); },
                                                  in.tau, j, 1e-6);
    }
    worst = std::max(worst, (analytic - numeric).norm() / std::max(numeric.norm(), 1e-12));

    const EmUpdate up = update_hyperparams(in.alpha, in.tau, 1.0, in.ws(), Matrix::Zero(1, k), Vector::Ones(k));
    for (std::size_t i = 1; i < up.objective_trace.size(); ++i) {
      ++accepted;
      non_increasing += up.objective_trace[i] > up.objective_trace[i - 1] ? 0 : 1;
    }
    non_increasing += std::abs(up.objective_after - direct_objective(in, up.alpha, up.tau)) <=
                              1e-10 * (1.0 + std::abs(up.objective_after))
                          ? 0
                          : 1;
  }
  return {worst < 1e-5 && non_increasing == 0,
          fmt("worst relative gradient error %.2g (bound 1e-5); %d of %d accepted steps failed to increase J", worst,
              non_increasing, accepted)};
}

Outcome noiseless_recovery() {
  const Index k = 3, n = 10, m = 10 * k * n;
  int recovered = 0;
  std::string errors;
  for (int seed = 0; seed < 10; ++seed) {
    const SyntheticDataset d = gen_gmm({k, n, 10, 0, static_cast<std::uint64_t>(100 + seed)});
    const FrequencyMatrix f =
        draw_frequencies(n, m, RadiusLaw::adapted_radius, std::sqrt(1.0 + center_variance(k, n)), 77 + seed);
    Sketch s;
    s.values = analytic_sketch(d.means, GmmHyperparams::uniform(k, 1.0), f);
    s.frequencies = f.provenance();
    s.sample_count = 1;
    EngineConfig config;
    config.clusters = k;
    config.seed = static_cast<std::uint64_t>(seed);
    const double err = max_matched_error(run(s, f, config).centroids, d.means);
    recovered += err < 1e-2 ? 1 : 0;
    errors += fmt(" %.1e", err);
  }
  return {recovered >= 8, fmt("%d/10 seeds recovered (need 8); max column errors:%s", recovered, errors.c_str())};
}

Outcome headline_sse() {
  const Index k = 5, n = 20;
  std::vector<double> clamp3, clamp10, km;
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint64_t seed = trial_seed(1, trial);
    const SyntheticDataset d = gen_gmm({k, n, 10000, 0, seed});
    ClampTrialOptions options;
    options.classify = false;
    options.m = 3 * k * n;
    clamp3.push_back(run_clamp_trial(d, options, seed).sse);
    options.m = 10 * k * n;
    clamp10.push_back(run_clamp_trial(d, options, seed).sse);
    KMeansTrialOptions kopt;
    kopt.classify = false;
    km.push_back(run_kmeans_trial(d, kopt, seed).sse);
  }
  const double r3 = median(clamp3) / median(km);
  const double r10 = median(clamp10) / median(km);
  return {r3 <= 1.1 && r10 <= 1.0,
          fmt("median SSE ratio to k-means++ (1 replicate): M=3KN %.4f (bound 1.1), M=10KN %.4f (bound 1.0)", r3, r10)};
}

double seconds_per_iteration(Index k, int run) {
  const Index n = 20, m = 2000;
  const SyntheticDataset d = gen_gmm({k, n, 5000, 0, static_cast<std::uint64_t>(run + 1)});
  const FrequencyMatrix f = draw_frequencies(n, m, RadiusLaw::adapted_radius, estimate_scale(d.train, 3), 4);
  const Sketch s = compute_sketch(d.train, f);
  EngineConfig config;
  config.clusters = k;
  const Initialization init = default_init(s, f, k, 5);
  EngineState state = make_state(init.centroids, init.qc, m);
  GmmHyperparams h = init.hyper;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 5; ++i) step(state, s.values, f, h, config, true);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 5.0;
}

Outcome complexity_scaling() {
  std::vector<double> ratios;
  for (int run = 0; run < 5; ++run) ratios.push_back(seconds_per_iteration(16, run) / seconds_per_iteration(8, run));
  const double med = median(ratios);
  return {med <= 2.5, fmt("median per-iteration time ratio K=16 vs K=8 = %.3f (bound 2.5)", med)};
}

Outcome classification() {
  const Index k = 5, n = 10;
  std::vector<double> gaps, errors, bayes;
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint64_t seed = trial_seed(9, trial);
    const SyntheticDataset d = gen_gmm({k, n, 10000, 100000, seed});
    ClampTrialOptions options;
    options.m = 10 * k * n;
    const EvalReport r = run_clamp_trial(d, options, seed);
    gaps.push_back(r.error_rate - r.bayes_rate);
    errors.push_back(r.error_rate);
    bayes.push_back(r.bayes_rate);
  }
  const double gap = median(gaps);
  return {gap <= 0.02, fmt("median (error - Bayes) = %.4f (bound 0.02); median error %.4f, median Bayes %.4f", gap,
                           median(errors), median(bayes))};
}

Outcome baseline_correctness() {
  Rng rng(10);
  int mismatches = 0, matrices = 0;
  for (Index k = 1; k <= 6; ++k) {
    for (int i = 0; i < 200; ++i) {
      Matrix cost(k, k);
      for (Index r = 0; r < k; ++r) {
        for (Index c = 0; c < k; ++c) cost(r, c) = rng.normal();
      }
      if (i % 5 == 0) cost = cost.array().round().matrix();
      ++matrices;
      const double diff = std::abs(assignment_cost(cost, hungarian(cost)) - oracle::brute_force_assignment(cost).cost);
      mismatches += diff <= 1e-12 ? 0 : 1;
    }
  }
  int increases = 0;
  long transitions = 0;
  for (int instance = 0; instance < 200; ++instance) {
    const Index k = 2 + static_cast<Index>(rng.below(9));
    const SyntheticDataset d =
        gen_gmm({k, 2 + static_cast<Index>(rng.below(10)), 500, 0, static_cast<std::uint64_t>(instance)});
    Matrix init(d.train.rows(), k);
    for (Index i = 0; i < init.size(); ++i) init.data()[i] = 4.0 * rng.normal();
    const LloydResult r = lloyd(d.train, init);
    for (std::size_t i = 1; i < r.sse_trace.size(); ++i) {
      ++transitions;
      increases += r.sse_trace[i] <= r.sse_trace[i - 1] ? 0 : 1;
    }
  }
  return {mismatches == 0 && increases == 0,
          fmt("Hungarian vs brute force: %d mismatches in %d matrices (K=1..6); Lloyd: %d SSE increases in %ld "
              "iterations",
              mismatches, matrices, increases, transitions)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "sketch concentration", 60, sketch_concentration},
      {2, "GvM identity", 60, gvm_identity},
      {3, "interference moments vs Monte Carlo", 300, moment_oracle},
      {4, "Laplace vs quadrature", 60, laplace_vs_quadrature},
      {5, "EM gradient and ascent", 60, em_gradient_check},
      {6, "noiseless self-consistency", 120, noiseless_recovery},
      {7, "SSE vs k-means++ at desk scale", 600, headline_sse},
      {8, "per-iteration complexity in K", 600, complexity_scaling},
      {9, "classification vs Bayes rate", 600, classification},
      {10, "baseline correctness", 600, baseline_correctness},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed <= c.budget_seconds;
    const bool pass = outcome.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("criterion %2d %s: %s | %s | %.1fs (budget %.0fs)\n", c.id, pass ? "PASS" : "FAIL", c.name,
                outcome.detail.c_str(), elapsed, c.budget_seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
