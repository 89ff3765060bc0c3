#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "skcl/engine.hpp"
#include "skcl/evaluation.hpp"
#include "skcl/frequencies.hpp"
#include "skcl/synth.hpp"

namespace skcl {

// Sketch sizes logarithmically spaced in [lo * K N, hi * K N], rounded and deduplicated.
std::vector<Index> log_spaced_sizes(Index k, Index n, double lo, double hi, int points);
std::vector<double> log_spaced_rates(double lo, double hi, int points);

struct ClampTrialOptions {
  Index m = 0;
  RadiusLaw law = RadiusLaw::adapted_radius;
  EngineConfig engine;
  bool classify = true;
};

// Sketch the training set (timed, scale estimate included), recover centroids
// with the engine, then score SSE on the full training set and, optionally,
// test classification. runtime_seconds includes the sketch time.
EvalReport run_clamp_trial(const SyntheticDataset& data, const ClampTrialOptions& options, std::uint64_t seed);

struct KMeansTrialOptions {
  double rate = 1.0;
  int replicates = 1;
  bool classify = true;
};

EvalReport run_kmeans_trial(const SyntheticDataset& data, const KMeansTrialOptions& options, std::uint64_t seed);

struct SweepSpec {
  Index k = 5;
  Index n = 20;
  Index t = 10000;
  Index test_t = 100000;
  std::vector<Index> m_grid;
  std::vector<double> kmeans_rates{1.0};
  std::vector<int> kmeans_replicates{1};
  int trials = 10;
  std::uint64_t seed = 1;
  RadiusLaw law = RadiusLaw::adapted_radius;
  EngineConfig engine;
  bool classify = true;

  void validate() const;
};

// Trial seeds derived from the sweep seed.
std::uint64_t trial_seed(std::uint64_t sweep_seed, int trial);

// Per-trial rows sorted by (algorithm, grid point, seed), followed by "median"
// and "std" summary rows per (algorithm, grid point). on_row sees trial rows as
// they are produced.
std::vector<EvalReport> run_sweep(const SweepSpec& spec, const std::function<void(const EvalReport&)>& on_row = {});

double median(std::vector<double> values);

}  // namespace skcl
