#include "skcl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <tuple>

#include "skcl/kmeans.hpp"
#include "skcl/rng.hpp"
#include "skcl/sketch.hpp"

namespace skcl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

EvalReport base_report(const SyntheticDataset& data, const char* algorithm, std::uint64_t seed) {
  EvalReport r;
  r.algorithm = algorithm;
  r.k = data.means.cols();
  r.n = data.train.rows();
  r.t = data.train.cols();
  r.seed = std::to_string(seed);
  return r;
}

void score(EvalReport& report, const SyntheticDataset& data, const Centroids& centroids, bool classify) {
  report.sse = sse(data.train, centroids);
  if (classify && data.test.cols() > 0) {
    const ClassificationScore s = classify_and_score(data.test, data.test_labels, centroids, data.means);
    report.error_rate = s.error_rate;
    report.bayes_rate = s.bayes_rate;
  } else {
    report.error_rate = std::nan("");
    report.bayes_rate = std::nan("");
  }
}

double stddev(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace

std::vector<Index> log_spaced_sizes(Index k, Index n, double lo, double hi, int points) {
  if (points < 1 || !(lo > 0.0) || hi < lo) throw Error("log_spaced_sizes: invalid range");
  const double base = static_cast<double>(k * n);
  std::vector<Index> out;
  for (int i = 0; i < points; ++i) {
    const double frac = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    const double factor = lo * std::pow(hi / lo, frac);
    const auto m = std::max<Index>(1, static_cast<Index>(std::llround(factor * base)));
    if (out.empty() || out.back() != m) out.push_back(m);
  }
  return out;
}

std::vector<double> log_spaced_rates(double lo, double hi, int points) {
  if (points < 1 || !(lo > 0.0) || hi < lo || hi > 1.0) throw Error("log_spaced_rates: invalid range");
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    const double frac = points == 1 ? 1.0 : static_cast<double>(i) / (points - 1);
    out.push_back(lo * std::pow(hi / lo, frac));
  }
  return out;
}

EvalReport run_clamp_trial(const SyntheticDataset& data, const ClampTrialOptions& options, std::uint64_t seed) {
  EvalReport report = base_report(data, "clamp", seed);
  report.m_or_rate = static_cast<double>(options.m);
  report.replicates = options.engine.restarts;

  const auto start = Clock::now();
  const double scale = estimate_scale(data.train, derive_seed(seed, 10));
  const FrequencyMatrix freqs = draw_frequencies(data.train.rows(), options.m, options.law, scale, derive_seed(seed, 11));
  const Sketch sketch = compute_sketch(data.train, freqs);
  report.sketch_seconds = seconds_since(start);

  EngineConfig config = options.engine;
  config.clusters = data.means.cols();
  config.seed = derive_seed(seed, 12);
  const EngineResult result = run(sketch, freqs, config);
  report.runtime_seconds = seconds_since(start);

  score(report, data, result.centroids, options.classify);
  return report;
}

EvalReport run_kmeans_trial(const SyntheticDataset& data, const KMeansTrialOptions& options, std::uint64_t seed) {
  EvalReport report = base_report(data, "kmeans++", seed);
  report.m_or_rate = options.rate;
  report.replicates = options.replicates;

  KMeansOptions km;
  km.replicates = options.replicates;
  km.subsample_rate = options.rate;
  km.seed = derive_seed(seed, 20);
  const auto start = Clock::now();
  const KMeansResult result = kmeans_pp(data.train, data.means.cols(), km);
  report.runtime_seconds = seconds_since(start);
  report.sketch_seconds = 0.0;

  score(report, data, result.centroids, options.classify);
  return report;
}

void SweepSpec::validate() const {
  if (k < 1 || n < 1 || t < 1) throw Error("sweep: K, N, T must be positive");
  if (trials < 1) throw Error("sweep: need at least one trial");
  if (m_grid.empty() && (kmeans_rates.empty() || kmeans_replicates.empty())) throw Error("sweep: empty grids");
  if ((kmeans_rates.empty()) != (kmeans_replicates.empty())) {
    throw Error("sweep: k-means rates and replicates must both be given or both be empty");
  }
}

std::uint64_t trial_seed(std::uint64_t sweep_seed, int trial) {
  return derive_seed(sweep_seed, 1000 + static_cast<std::uint64_t>(trial));
}

std::vector<EvalReport> run_sweep(const SweepSpec& spec, const std::function<void(const EvalReport&)>& on_row) {
  spec.validate();
  std::vector<EvalReport> rows;
  for (int trial = 0; trial < spec.trials; ++trial) {
    const std::uint64_t seed = trial_seed(spec.seed, trial);
    SynthSpec synth{spec.k, spec.n, spec.t, spec.classify ? spec.test_t : 0, seed};
    const SyntheticDataset data = gen_gmm(synth);

    for (Index m : spec.m_grid) {
      ClampTrialOptions options{m, spec.law, spec.engine, spec.classify};
      rows.push_back(run_clamp_trial(data, options, seed));
      if (on_row) on_row(rows.back());
    }
    for (int replicates : spec.kmeans_replicates) {
      for (double rate : spec.kmeans_rates) {
        KMeansTrialOptions options{rate, replicates, spec.classify};
        rows.push_back(run_kmeans_trial(data, options, seed));
        if (on_row) on_row(rows.back());
      }
    }
  }

  auto key = [](const EvalReport& r) { return std::make_tuple(r.algorithm, r.replicates, r.m_or_rate); };
  std::stable_sort(rows.begin(), rows.end(), [&](const EvalReport& a, const EvalReport& b) {
    if (key(a) != key(b)) return key(a) < key(b);
    return std::stoull(a.seed) < std::stoull(b.seed);
  });

  std::vector<EvalReport> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && key(rows[j]) == key(rows[i])) ++j;
    std::vector<double> sse, err, bayes, runtime, sketch;
    for (std::size_t r = i; r < j; ++r) {
      out.push_back(rows[r]);
      sse.push_back(rows[r].sse);
      err.push_back(rows[r].error_rate);
      bayes.push_back(rows[r].bayes_rate);
      runtime.push_back(rows[r].runtime_seconds);
      sketch.push_back(rows[r].sketch_seconds);
    }
    EvalReport med = rows[i];
    med.seed = "median";
    med.sse = median(sse);
    med.error_rate = median(err);
    med.bayes_rate = median(bayes);
    med.runtime_seconds = median(runtime);
    med.sketch_seconds = median(sketch);
    EvalReport sd = rows[i];
    sd.seed = "std";
    sd.sse = stddev(sse);
    sd.error_rate = stddev(err);
    sd.bayes_rate = stddev(bayes);
    sd.runtime_seconds = stddev(runtime);
    sd.sketch_seconds = stddev(sketch);
    out.push_back(med);
    out.push_back(sd);
    i = j;
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace skcl
