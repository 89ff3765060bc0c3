#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "skcl/denoisers.hpp"
#include "skcl/em.hpp"
#include "skcl/frequencies.hpp"
#include "skcl/gmm.hpp"
#include "skcl/sketch.hpp"
#include "skcl/types.hpp"

namespace skcl {

struct EngineConfig {
  Index clusters = 1;
  int max_iters = 200;
  // relative Frobenius change of C that ends a restart
  double tol = 1e-6;
  // weight of the new iterate for C and S; 1 disables damping
  double damping = 0.7;
  int restarts = 2;
  bool em_enabled = true;
  int em_period = 1;
  bool learn_nu = false;
  double nu = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  double variance_floor = 1e-12;
  DenoiserOptions denoiser;
  EmOptions em;

  void validate() const;
};

// Per-iteration message-passing quantities. Variances are shared across rows,
// so qc, qp, qs and qr are length-K vectors; qz keeps one row per measurement.
struct EngineState {
  Matrix chat;  // N x K
  Vector qc;
  Matrix phat;  // M x K
  Vector qp;
  Matrix zhat;  // M x K
  Matrix qz;    // M x K
  Matrix shat;  // M x K
  Vector qs;
  Matrix rhat;  // N x K
  Vector qr;
  int iteration = 0;
};

struct IterationRecord {
  int restart = 0;
  int iteration = 0;
  double residual = 0.0;
  double change = 0.0;
  Index qs_clamps = 0;
  DenoiserStats denoiser;
  double em_objective = 0.0;
  int em_steps = 0;
};

// Replaceable denoisers for testing the message-passing algebra in isolation.
struct StepHooks {
  std::function<PosteriorMomentsZ(Complex y, const PseudoPriorZ&, const GmmHyperparams&, double g)> denoise_z;
  std::function<PosteriorMomentsC(const Vector& rhat, const Vector& qr, double nu)> denoise_c;
};

struct Initialization {
  Centroids centroids;
  GmmHyperparams hyper;
  Vector qc;
};

// Random restart: centroid entries i.i.d. N(0, nu0) with nu0 = scale^2 read from
// the frequency provenance, uniform weights, and tau from the same scale.
Initialization default_init(const Sketch& y, const FrequencyMatrix& freqs, Index clusters, std::uint64_t seed);

EngineState make_state(const Centroids& centroids, const Vector& qc, Index measurements);

// One sweep of the message-passing loop. Runs the EM hyperparameter update after
// the output denoiser when run_em is set. Throws skcl::Error on non-finite state.
IterationRecord step(EngineState& state, const ComplexVector& y, const FrequencyMatrix& freqs, GmmHyperparams& hyper,
                     const EngineConfig& config, bool run_em, const StepHooks* hooks = nullptr);

// True iff ||next - prev||_F <= tol (||prev||_F + 1e-30).
bool converged(const Centroids& prev, const Centroids& next, double tol);

struct EngineResult {
  Centroids centroids;
  GmmHyperparams hyper;
  int best_restart = -1;
  std::vector<double> restart_residuals;  // NaN for a failed restart
  std::vector<int> restart_iterations;
  int failed_restarts = 0;
  std::vector<IterationRecord> trace;
};

EngineResult run(const Sketch& y, const FrequencyMatrix& freqs, const EngineConfig& config,
                 const std::optional<Centroids>& init = std::nullopt);

}  // namespace skcl
