#include "skcl_cli/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "skcl/bench.hpp"
#include "skcl/engine.hpp"
#include "skcl/evaluation.hpp"
#include "skcl/io.hpp"
#include "skcl/kmeans.hpp"
#include "skcl/sketch.hpp"
#include "skcl/synth.hpp"

namespace skcl::cli {

namespace {

constexpr int kMaxBenchReplicates = 64;

// "d.bin" -> "d.test.bin"; "d" -> "d.test"
std::filesystem::path sibling(const std::filesystem::path& out, const std::string& tag, const std::string& ext) {
  std::filesystem::path p = out;
  const std::string stem = p.stem().string();
  const std::string original_ext = p.extension().string();
  p.replace_filename(stem + "." + tag + (ext.empty() ? original_ext : ext));
  return p;
}

void apply_thread_cap() {
  if (const char* env = std::getenv("SKCL_THREADS")) {
    char* end = nullptr;
    const long threads = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || threads < 1) throw Error("SKCL_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(threads));
  }
}

nlohmann::json record_to_json(const IterationRecord& r) {
  return {{"restart", r.restart},
          {"iteration", r.iteration},
          {"residual", r.residual},
          {"change", r.change},
          {"qs_clamps", r.qs_clamps},
          {"theta_fallbacks", r.denoiser.theta_fallbacks},
          {"curvature_clamps", r.denoiser.curvature_clamps},
          {"variance_clamps", r.denoiser.variance_clamps},
          {"negligible_components", r.denoiser.negligible_components},
          {"em_objective", r.em_objective},
          {"em_steps", r.em_steps}};
}

struct EngineFlags {
  int max_iters = 200;
  double tol = 1e-6;
  double damping = 0.7;
  int restarts = 2;
  bool no_em = false;
  int em_period = 1;
  bool learn_nu = false;

  void add(CLI::App* app) {
    app->add_option("--max-iters", max_iters, "Iteration cap per restart")->check(CLI::NonNegativeNumber);
    app->add_option("--tol", tol, "Relative centroid change that ends a restart")->check(CLI::PositiveNumber);
    app->add_option("--damping", damping, "Damping weight in (0,1]")->check(CLI::Range(0.0, 1.0));
    app->add_option("--restarts", restarts, "Random restarts")->check(CLI::PositiveNumber);
    app->add_flag("--no-em", no_em, "Keep alpha and tau at their initial values");
    app->add_option("--em-period", em_period, "Run EM every this many iterations")->check(CLI::PositiveNumber);
    app->add_flag("--learn-nu", learn_nu, "Learn the centroid prior variance instead of a flat prior");
  }

  EngineConfig config(Index k, std::uint64_t seed) const {
    EngineConfig c;
    c.clusters = k;
    c.max_iters = max_iters;
    c.tol = tol;
    c.damping = damping;
    c.restarts = restarts;
    c.em_enabled = !no_em;
    c.em_period = em_period;
    c.learn_nu = learn_nu;
    c.seed = seed;
    c.validate();
    return c;
  }
};

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path + " for writing");
  file << text;
  if (!file) throw Error("failed writing " + path);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sketched clustering with approximate message passing, and k-means++ baselines", "skcl"};
  app.require_subcommand(1);

  // synth
  SynthSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic Gaussian mixture dataset");
  synth->add_option("--k", synth_spec.k, "Clusters")->check(CLI::PositiveNumber);
  synth->add_option("--n", synth_spec.n, "Dimension")->check(CLI::PositiveNumber);
  synth->add_option("--t", synth_spec.t, "Training samples")->check(CLI::PositiveNumber);
  synth->add_option("--test-t", synth_spec.test_t, "Test samples (0 for none)")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_spec.seed, "Seed");
  synth->add_option("--out", synth_out, "Training set path; X.test.bin and X.truth.json are written next to it")
      ->required();

  // sketch
  std::string sketch_in, sketch_out, sketch_law = "adapted_radius";
  Index sketch_m = 0;
  std::uint64_t sketch_seed = 0;
  std::optional<double> sketch_scale;
  auto* sketch = app.add_subcommand("sketch", "Compute the sketch of a dataset");
  sketch->add_option("--in", sketch_in, "Dataset (binary or CSV)")->required()->check(CLI::ExistingFile);
  sketch->add_option("--m", sketch_m, "Sketch size")->required()->check(CLI::PositiveNumber);
  sketch->add_option("--seed", sketch_seed, "Frequency seed");
  sketch->add_option("--radius-law", sketch_law, "gaussian or adapted_radius")
      ->check(CLI::IsMember({"gaussian", "adapted_radius"}));
  sketch->add_option("--scale", sketch_scale, "Override the estimated data scale")->check(CLI::PositiveNumber);
  sketch->add_option("--out", sketch_out, "Sketch JSON path")->required();

  // cluster
  std::string cluster_sketch, cluster_out, cluster_init, cluster_trace;
  Index cluster_k = 0;
  std::uint64_t cluster_seed = 0;
  bool cluster_json_trace = false;
  EngineFlags cluster_flags;
  auto* cluster = app.add_subcommand("cluster", "Recover centroids from a sketch");
  cluster->add_option("--sketch", cluster_sketch, "Sketch JSON")->required()->check(CLI::ExistingFile);
  cluster->add_option("--k", cluster_k, "Clusters")->required()->check(CLI::PositiveNumber);
  cluster->add_option("--seed", cluster_seed, "Restart seed");
  cluster->add_option("--init", cluster_init, "Centroid JSON used for the first restart")->check(CLI::ExistingFile);
  cluster->add_option("--trace", cluster_trace, "Write per-iteration diagnostics as JSON lines to this file");
  cluster->add_flag("--json-trace", cluster_json_trace, "Write per-iteration diagnostics as JSON lines to stderr");
  cluster->add_option("--out", cluster_out, "Centroid JSON path")->required();
  cluster_flags.add(cluster);

  // kmeans
  std::string kmeans_in, kmeans_out;
  Index kmeans_k = 0;
  KMeansOptions kmeans_options;
  auto* kmeans = app.add_subcommand("kmeans", "k-means++ with Lloyd iterations");
  kmeans->add_option("--in", kmeans_in, "Dataset (binary or CSV)")->required()->check(CLI::ExistingFile);
  kmeans->add_option("--k", kmeans_k, "Clusters")->required()->check(CLI::PositiveNumber);
  kmeans->add_option("--replicates", kmeans_options.replicates, "Replicates")->check(CLI::PositiveNumber);
  kmeans->add_option("--rate", kmeans_options.subsample_rate, "Subsampling rate in (0,1]")
      ->check(CLI::Range(0.0, 1.0));
  kmeans->add_option("--seed", kmeans_options.seed, "Seed");
  kmeans->add_option("--out", kmeans_out, "Centroid JSON path")->required();

  // eval
  std::string eval_centroids, eval_train, eval_test, eval_truth, eval_out, eval_algorithm = "unknown", eval_seed = "0";
  double eval_m_or_rate = 0.0;
  int eval_replicates = 0;
  double eval_runtime = 0.0, eval_sketch_time = 0.0;
  bool eval_header = false;
  auto* eval = app.add_subcommand("eval", "Score centroids: training SSE and optional test classification");
  eval->add_option("--centroids", eval_centroids, "Centroid JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--train", eval_train, "Training dataset")->required()->check(CLI::ExistingFile);
  eval->add_option("--test", eval_test, "Test dataset")->check(CLI::ExistingFile);
  eval->add_option("--truth", eval_truth, "Truth JSON (means and labels)")->check(CLI::ExistingFile);
  eval->add_option("--algorithm", eval_algorithm, "Value of the algorithm column");
  eval->add_option("--m-or-rate", eval_m_or_rate, "Value of the m_or_rate column");
  eval->add_option("--replicates", eval_replicates, "Value of the replicates column");
  eval->add_option("--runtime", eval_runtime, "Value of the runtime_seconds column");
  eval->add_option("--sketch-time", eval_sketch_time, "Value of the sketch_seconds column");
  eval->add_option("--seed", eval_seed, "Value of the seed column");
  eval->add_flag("--header", eval_header, "Print the CSV header first");
  eval->add_option("--out", eval_out, "CSV path (default stdout)");

  // bench
  SweepSpec sweep;
  std::vector<Index> bench_m;
  int bench_m_points = 5;
  double bench_m_lo = 1.0, bench_m_hi = 10.0;
  std::vector<double> bench_rates{1.0};
  std::vector<int> bench_replicates{1};
  std::string bench_out, bench_law = "adapted_radius";
  bool bench_no_classify = false;
  EngineFlags bench_flags;
  auto* bench = app.add_subcommand(
      "bench", "Benchmark sweep: CSV of per-trial and median/std rows vs sketch size and k-means++ rate");
  bench->add_option("--k", sweep.k, "Clusters")->check(CLI::PositiveNumber);
  bench->add_option("--n", sweep.n, "Dimension")->check(CLI::PositiveNumber);
  bench->add_option("--t", sweep.t, "Training samples")->check(CLI::PositiveNumber);
  bench->add_option("--test-t", sweep.test_t, "Test samples")->check(CLI::NonNegativeNumber);
  bench->add_option("--trials", sweep.trials, "Trials")->check(CLI::PositiveNumber);
  bench->add_option("--seed", sweep.seed, "Sweep seed");
  bench->add_option("--m", bench_m, "Explicit sketch sizes (overrides the log-spaced grid)");
  bench->add_option("--m-points", bench_m_points, "Points in the log-spaced sketch-size grid")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--m-lo", bench_m_lo, "Grid start as a multiple of K*N")->check(CLI::PositiveNumber);
  bench->add_option("--m-hi", bench_m_hi, "Grid end as a multiple of K*N")->check(CLI::PositiveNumber);
  bench->add_option("--rates", bench_rates, "k-means++ subsampling rates")->check(CLI::Range(0.0, 1.0));
  bench->add_option("--replicates", bench_replicates, "k-means++ replicate counts (at most 64)")
      ->check(CLI::Range(1, kMaxBenchReplicates));
  bench->add_option("--radius-law", bench_law, "gaussian or adapted_radius")
      ->check(CLI::IsMember({"gaussian", "adapted_radius"}));
  bench->add_flag("--no-classify", bench_no_classify, "Skip test-set classification");
  bench->add_option("--out", bench_out, "CSV path (default stdout)");
  bench_flags.add(bench);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    apply_thread_cap();

    if (*synth) {
      synth_spec.validate();
      const SyntheticDataset data = gen_gmm(synth_spec);
      const std::filesystem::path base = synth_out;
      write_dataset(base, data.train);
      if (data.test.cols() > 0) write_dataset(sibling(base, "test", ""), data.test);
      write_truth(sibling(base, "truth", ".json"), {data.means, data.train_labels, data.test_labels});
      return 0;
    }

    if (*sketch) {
      const DataMatrix data = load_dataset(sketch_in);
      const double scale = sketch_scale ? *sketch_scale : estimate_scale(data, derive_seed(sketch_seed, 1));
      const FrequencyMatrix freqs =
          draw_frequencies(data.rows(), sketch_m, parse_radius_law(sketch_law), scale, sketch_seed);
      write_sketch(sketch_out, compute_sketch(data, freqs));
      return 0;
    }

    if (*cluster) {
      const Sketch y = read_sketch(cluster_sketch);
      const FrequencyMatrix freqs = regenerate(y.frequencies);
      const EngineConfig config = cluster_flags.config(cluster_k, cluster_seed);
      std::optional<Centroids> init;
      if (!cluster_init.empty()) {
        init = read_centroids(cluster_init).centroids;
        if (init->rows() != y.dim() || init->cols() != cluster_k) throw Error("init centroids have the wrong shape");
      }
      const EngineResult result = run(y, freqs, config, init);
      if (!cluster_trace.empty() || cluster_json_trace) {
        std::ostringstream lines;
        for (const IterationRecord& r : result.trace) lines << record_to_json(r).dump() << '\n';
        if (!cluster_trace.empty()) write_text(cluster_trace, lines.str(), out);
        if (cluster_json_trace) err << lines.str();
      }
      write_centroids(cluster_out, {result.centroids, result.hyper});
      return 0;
    }

    if (*kmeans) {
      const DataMatrix data = load_dataset(kmeans_in);
      const KMeansResult result = kmeans_pp(data, kmeans_k, kmeans_options);
      write_centroids(kmeans_out, {result.centroids, std::nullopt});
      return 0;
    }

    if (*eval) {
      const Centroids centroids = read_centroids(eval_centroids).centroids;
      const DataMatrix train = load_dataset(eval_train);
      if (centroids.rows() != train.rows()) throw Error("centroid dimension does not match the training data");
      EvalReport report;
      report.algorithm = eval_algorithm;
      report.k = centroids.cols();
      report.n = train.rows();
      report.t = train.cols();
      report.m_or_rate = eval_m_or_rate;
      report.replicates = eval_replicates;
      report.sse = skcl::sse(train, centroids);
      report.error_rate = report.bayes_rate = std::numeric_limits<double>::quiet_NaN();
      report.runtime_seconds = eval_runtime;
      report.sketch_seconds = eval_sketch_time;
      report.seed = eval_seed;
      if (!eval_test.empty() != !eval_truth.empty()) throw Error("--test and --truth must be given together");
      if (!eval_test.empty()) {
        const DataMatrix test = load_dataset(eval_test);
        const TruthFile truth = read_truth(eval_truth);
        const ClassificationScore score = classify_and_score(test, truth.test_labels, centroids, truth.means);
        report.error_rate = score.error_rate;
        report.bayes_rate = score.bayes_rate;
      }
      std::string text = to_csv_row(report) + "\n";
      if (eval_header) text = std::string(kReportHeader) + "\n" + text;
      write_text(eval_out, text, out);
      return 0;
    }

    if (*bench) {
      sweep.law = parse_radius_law(bench_law);
      sweep.engine = bench_flags.config(sweep.k, 0);
      sweep.classify = !bench_no_classify && sweep.test_t > 0;
      if (!bench_m.empty()) {
        sweep.m_grid = bench_m;
      } else if (bench_m_points > 0) {
        sweep.m_grid = log_spaced_sizes(sweep.k, sweep.n, bench_m_lo, bench_m_hi, bench_m_points);
      }
      sweep.kmeans_rates = bench_rates;
      sweep.kmeans_replicates = bench_replicates;
      const std::vector<EvalReport> rows = run_sweep(sweep);
      std::ostringstream csv;
      csv << kReportHeader << '\n';
      for (const EvalReport& r : rows) csv << to_csv_row(r) << '\n';
      write_text(bench_out, csv.str(), out);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "skcl: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace skcl::cli
