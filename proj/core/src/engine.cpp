#include "skcl/engine.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "skcl/rng.hpp"

namespace skcl {

void EngineConfig::validate() const {
  if (clusters < 1) throw Error("engine: K must be at least 1");
  if (max_iters < 0) throw Error("engine: max_iters must be nonnegative");
  if (!(tol >= 0.0)) throw Error("engine: tol must be nonnegative");
  if (!(damping > 0.0 && damping <= 1.0)) throw Error("engine: damping must lie in (0, 1]");
  if (restarts < 1) throw Error("engine: need at least one restart");
  if (em_period < 1) throw Error("engine: em_period must be positive");
  if (!(variance_floor > 0.0)) throw Error("engine: variance_floor must be positive");
  if (!(nu > 0.0)) throw Error("engine: nu must be positive");
}

Initialization default_init(const Sketch& y, const FrequencyMatrix& freqs, Index clusters, std::uint64_t seed) {
  if (clusters < 1) throw Error("default_init: K must be at least 1");
  (void)y;
  const double scale = freqs.provenance().scale;
  const double prior_var = scale * scale;
  Rng rng(seed);
  Initialization init;
  init.centroids.resize(freqs.dim(), clusters);
  const double sd = std::sqrt(prior_var);
  for (Index k = 0; k < clusters; ++k) {
    for (Index n = 0; n < freqs.dim(); ++n) init.centroids(n, k) = sd * rng.normal();
  }
  init.hyper = GmmHyperparams::uniform(clusters, 0.5 * prior_var);
  init.qc = Vector::Constant(clusters, prior_var);
  return init;
}

EngineState make_state(const Centroids& centroids, const Vector& qc, Index measurements) {
  const Index k = centroids.cols();
  if (qc.size() != k) throw Error("make_state: qc length does not match K");
  EngineState state;
  state.chat = centroids;
  state.qc = qc;
  state.phat = Matrix::Zero(measurements, k);
  state.qp = qc;
  state.zhat = Matrix::Zero(measurements, k);
  state.qz = Matrix::Zero(measurements, k);
  state.shat = Matrix::Zero(measurements, k);
  state.qs = Vector::Zero(k);
  state.rhat = centroids;
  state.qr = qc;
  return state;
}

bool converged(const Centroids& prev, const Centroids& next, double tol) {
  if (prev.rows() != next.rows() || prev.cols() != next.cols()) throw Error("converged: shape mismatch");
  return (next - prev).norm() <= tol * (prev.norm() + 1e-30);
}

IterationRecord step(EngineState& state, const ComplexVector& y, const FrequencyMatrix& freqs, GmmHyperparams& hyper,
                     const EngineConfig& config, bool run_em, const StepHooks* hooks) {
  const Matrix& directions = freqs.directions();
  const Vector& radii = freqs.radii();
  const Index measurements = directions.rows();
  const Index dim = directions.cols();
  const Index clusters = state.chat.cols();
  const double floor = config.variance_floor;

  IterationRecord record;
  record.iteration = state.iteration;

  // q^p: mean of the per-row centroid variances (shared across rows here)
  state.qp = state.qc.cwiseMax(floor);
  state.phat = directions * state.chat - state.shat * state.qp.asDiagonal();

  // output denoiser, independently per measurement
  DenoiserStats stats;
  const bool custom_z = hooks != nullptr && hooks->denoise_z;
  Index denoiser_errors = 0;
#pragma omp parallel reduction(+ : denoiser_errors)
  {
    DenoiserStats local;
    PseudoPriorZ pseudo{Vector(clusters), state.qp};
#pragma omp for schedule(static)
    for (Index m = 0; m < measurements; ++m) {
      pseudo.mean = state.phat.row(m).transpose();
      try {
        const PosteriorMomentsZ post = custom_z ? hooks->denoise_z(y[m], pseudo, hyper, radii[m])
                                                : denoise_z(y[m], pseudo, hyper, radii[m], config.denoiser, &local);
        state.zhat.row(m) = post.mean.transpose();
        state.qz.row(m) = post.variance.transpose();
      } catch (const Error&) {
        ++denoiser_errors;
      }
    }
#pragma omp critical
    stats += local;
  }
  if (denoiser_errors > 0) throw Error("engine: output denoiser failed");
  record.denoiser = stats;

  if (run_em) {
    EmOptions em_options = config.em;
    em_options.learn_nu = config.learn_nu;
    const EmWorkspace ws{state.zhat, state.qz, y, radii};
    const EmUpdate update = update_hyperparams(hyper.alpha, hyper.tau, hyper.nu, ws, state.chat, state.qc, em_options);
    hyper.alpha = update.alpha;
    hyper.tau = update.tau;
    hyper.nu = update.nu;
    record.em_objective = update.objective_after;
    record.em_steps = update.accepted_steps;
  }

  // q^s, clamped to keep q^r finite and positive
  const Vector mean_qz = state.qz.colwise().mean().transpose();
  state.qs = state.qp.cwiseInverse() - mean_qz.cwiseQuotient(state.qp.cwiseProduct(state.qp));
  std::vector<bool> clamped(static_cast<std::size_t>(clusters), false);
  for (Index k = 0; k < clusters; ++k) {
    if (!(state.qs[k] > floor)) {
      state.qs[k] = floor;
      clamped[k] = true;
      ++record.qs_clamps;
    }
  }

  const Matrix shat_new = (state.zhat - state.phat) * state.qp.cwiseInverse().asDiagonal();
  state.shat = config.damping * shat_new + (1.0 - config.damping) * state.shat;
  // A clamped column carries no measurement information; with q^r ~ 1/floor any
  // stale residual in it would be amplified into the centroid, so it is silenced
  // and the column's centroid estimate is held for this iteration.
  for (Index k = 0; k < clusters; ++k) {
    if (clamped[k]) state.shat.col(k).setZero();
  }

  state.qr = (static_cast<double>(dim) / static_cast<double>(measurements)) * state.qs.cwiseInverse();
  state.rhat = state.chat + directions.transpose() * state.shat * state.qr.asDiagonal();

  // input denoiser, independently per row
  Matrix chat_new(dim, clusters);
  Vector qc_sum = Vector::Zero(clusters);
  const bool custom_c = hooks != nullptr && hooks->denoise_c;
  for (Index n = 0; n < dim; ++n) {
    const Vector row = state.rhat.row(n).transpose();
    const PosteriorMomentsC post = custom_c ? hooks->denoise_c(row, state.qr, hyper.nu) : denoise_c(row, state.qr, hyper.nu);
    chat_new.row(n) = post.mean.transpose();
    qc_sum += post.variance;
  }
  const Vector qc_prev = state.qc;
  const Matrix chat_prev = state.chat;
  state.qc = (qc_sum / static_cast<double>(dim)).cwiseMax(floor);
  state.chat = config.damping * chat_new + (1.0 - config.damping) * state.chat;
  for (Index k = 0; k < clusters; ++k) {
    if (clamped[k]) {
      state.chat.col(k) = chat_prev.col(k);
      state.qc[k] = qc_prev[k];
    }
  }
  ++state.iteration;

  if (!state.chat.allFinite() || !state.shat.allFinite() || !state.qc.allFinite() || !state.qr.allFinite()) {
    throw Error("engine: non-finite state");
  }
  return record;
}

EngineResult run(const Sketch& y, const FrequencyMatrix& freqs, const EngineConfig& config,
                 const std::optional<Centroids>& init) {
  config.validate();
  if (y.size() != freqs.count() || y.dim() != freqs.dim()) throw Error("engine: sketch does not match frequencies");
  if (init && (init->rows() != freqs.dim() || init->cols() != config.clusters)) {
    throw Error("engine: initial centroids have the wrong shape");
  }

  EngineResult result;
  double best = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < config.restarts; ++restart) {
    Initialization start = default_init(y, freqs, config.clusters, derive_seed(config.seed, restart));
    start.hyper.nu = config.nu;
    if (init && restart == 0) start.centroids = *init;

    EngineState state = make_state(start.centroids, start.qc, freqs.count());
    GmmHyperparams hyper = start.hyper;
    bool failed = false;
    try {
      for (int it = 0; it < config.max_iters; ++it) {
        const Centroids prev = state.chat;
        const bool run_em = config.em_enabled && (it % config.em_period == 0);
        IterationRecord record = step(state, y.values, freqs, hyper, config, run_em);
        record.restart = restart;
        record.change = (state.chat - prev).norm() / (prev.norm() + 1e-30);
        record.residual = sketch_residual(y.values, state.chat, hyper, freqs);
        result.trace.push_back(record);
        if (converged(prev, state.chat, config.tol)) break;
      }
    } catch (const Error&) {
      failed = true;
    }

    if (failed) {
      ++result.failed_restarts;
      result.restart_residuals.push_back(std::numeric_limits<double>::quiet_NaN());
      result.restart_iterations.push_back(state.iteration);
      continue;
    }
    const double residual = sketch_residual(y.values, state.chat, hyper, freqs);
    result.restart_residuals.push_back(residual);
    result.restart_iterations.push_back(state.iteration);
    if (residual < best) {
      best = residual;
      result.best_restart = restart;
      result.centroids = state.chat;
      result.hyper = hyper;
    }
  }
  if (result.best_restart < 0) throw Error("engine: all restarts failed");
  return result;
}

}  // namespace skcl
