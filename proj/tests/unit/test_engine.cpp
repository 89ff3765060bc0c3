#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <omp.h>

#include "oracles.hpp"
#include "skcl/engine.hpp"
#include "skcl/hungarian.hpp"
#include "skcl/sketch.hpp"
#include "skcl/synth.hpp"

using namespace skcl;

namespace {

Sketch planted_sketch(const Centroids& c, const GmmHyperparams& h, const FrequencyMatrix& f) {
  Sketch s;
  s.values = analytic_sketch(c, h, f);
  s.frequencies = f.provenance();
  s.sample_count = 1000000;
  return s;
}

double max_matched_column_error(const Centroids& est, const Centroids& truth) {
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

}  // namespace

TEST(EngineConfig, Validation) {
  EngineConfig c;
  c.clusters = 2;
  EXPECT_NO_THROW(c.validate());
  c.damping = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c.damping = 1.0;
  c.tol = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c.tol = 1e-6;
  c.restarts = 0;
  EXPECT_THROW(c.validate(), Error);
  c.restarts = 1;
  c.variance_floor = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Converged, Examples) {
  const Matrix a = Matrix::Random(3, 2);
  EXPECT_TRUE(converged(a, a, 1e-12));
  Matrix b = a;
  b(0, 0) += 1e-3;
  EXPECT_FALSE(converged(a, b, 0.0));
  Matrix next = Matrix::Zero(2, 1);
  next(0, 0) = 1.0;
  EXPECT_FALSE(converged(Matrix::Zero(2, 1), next, 0.5));
}

TEST(DefaultInit, DeterministicUniformAndDiverse) {
  const FrequencyMatrix f = draw_frequencies(4, 30, RadiusLaw::gaussian, 2.0, 1);
  Sketch s = planted_sketch(Matrix::Zero(4, 1), GmmHyperparams::uniform(1, 1.0), f);
  const Initialization a = default_init(s, f, 3, 9);
  const Initialization b = default_init(s, f, 3, 9);
  const Initialization c = default_init(s, f, 3, 10);
  EXPECT_TRUE(a.centroids == b.centroids);
  EXPECT_GT((a.centroids - c.centroids).norm(), 0.0);
  EXPECT_EQ(a.centroids.rows(), 4);
  EXPECT_EQ(a.centroids.cols(), 3);
  for (Index k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(a.hyper.alpha[k], 1.0 / 3.0);
  EXPECT_TRUE((a.hyper.tau.array() > 0.0).all());
  EXPECT_TRUE((a.qc.array() > 0.0).all());
  EXPECT_EQ(a.qc.size(), 3);
}

TEST(Run, ZeroIterationsReturnsInitialization) {
  const FrequencyMatrix f = draw_frequencies(3, 40, RadiusLaw::gaussian, 1.0, 2);
  const Sketch s = planted_sketch(Matrix::Ones(3, 2), GmmHyperparams::uniform(2, 0.5), f);
  EngineConfig config;
  config.clusters = 2;
  config.max_iters = 0;
  config.restarts = 1;
  Matrix init(3, 2);
  init << 1, 2, 3, 4, 5, 6;
  const EngineResult r = run(s, f, config, init);
  EXPECT_TRUE(r.centroids == init);
  EXPECT_EQ(r.restart_iterations[0], 0);
}

TEST(Run, RecoversSinglePlantedCenter) {
  const Index n = 2, m = 32;
  Vector c_star(n);
  c_star << 0.8, -0.5;
  // small radii keep every phase inside (-pi, pi), so the phases alone determine
  // c* through an overdetermined linear system
  const FrequencyMatrix f = draw_frequencies(n, m, RadiusLaw::gaussian, 3.0, 5);
  GmmHyperparams h = GmmHyperparams::uniform(1, 0.0);
  const Sketch s = planted_sketch(c_star, h, f);
  Vector phases(m);
  for (Index i = 0; i < m; ++i) phases[i] = std::arg(s.values[i]);
  const Vector oracle_c = f.dense().colPivHouseholderQr().solve(phases);
  ASSERT_LT((oracle_c - c_star).norm(), 1e-10);

  EngineConfig config;
  config.clusters = 1;
  const EngineResult r = run(s, f, config);
  EXPECT_LT((r.centroids.col(0) - oracle_c).norm() / oracle_c.norm(), 1e-3);
}

TEST(Run, RecoversPlantedMixtureFromNoiselessSketch) {
  const Index k = 3, n = 10, m = 10 * k * n;
  int recovered = 0;
  for (int seed = 0; seed < 4; ++seed) {
    const SyntheticDataset d = gen_gmm({k, n, 10, 0, static_cast<std::uint64_t>(300 + seed)});
    const FrequencyMatrix f = draw_frequencies(n, m, RadiusLaw::adapted_radius,
                                               std::sqrt(1.0 + center_variance(k, n)), 400 + seed);
    const Sketch s = planted_sketch(d.means, GmmHyperparams::uniform(k, 1.0), f);
    EngineConfig config;
    config.clusters = k;
    config.seed = seed;
    const EngineResult r = run(s, f, config);
    recovered += max_matched_column_error(r.centroids, d.means) < 1e-2 ? 1 : 0;
  }
  EXPECT_GE(recovered, 3);
}

TEST(Run, BestRestartHasSmallestResidual) {
  const SyntheticDataset d = gen_gmm({3, 5, 3000, 0, 12});
  const FrequencyMatrix f = draw_frequencies(5, 60, RadiusLaw::adapted_radius, estimate_scale(d.train, 1), 13);
  const Sketch s = compute_sketch(d.train, f);
  EngineConfig config;
  config.clusters = 3;
  config.restarts = 3;
  config.max_iters = 40;
  const EngineResult r = run(s, f, config);
  ASSERT_EQ(r.restart_residuals.size(), 3u);
  const double best = sketch_residual(s.values, r.centroids, r.hyper, f);
  for (double res : r.restart_residuals) {
    if (!std::isnan(res)) EXPECT_LE(best, res);
  }
  EXPECT_DOUBLE_EQ(best, r.restart_residuals[r.best_restart]);
  EXPECT_FALSE(r.trace.empty());
}

TEST(Run, DeterministicForFixedSeed) {
  const SyntheticDataset d = gen_gmm({2, 4, 2000, 0, 21});
  const FrequencyMatrix f = draw_frequencies(4, 40, RadiusLaw::gaussian, estimate_scale(d.train, 1), 22);
  const Sketch s = compute_sketch(d.train, f);
  EngineConfig config;
  config.clusters = 2;
  config.max_iters = 30;
  config.seed = 77;
  const int threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const EngineResult a = run(s, f, config);
  const EngineResult b = run(s, f, config);
  omp_set_num_threads(std::max(threads, 2));
  const EngineResult c = run(s, f, config);
  omp_set_num_threads(threads);
  EXPECT_TRUE(a.centroids == b.centroids);
  EXPECT_TRUE(a.hyper.alpha == b.hyper.alpha);
  EXPECT_LT((a.centroids - c.centroids).norm(), 1e-9);
}

TEST(Run, ShapeMismatchThrows) {
  const FrequencyMatrix f = draw_frequencies(3, 20, RadiusLaw::gaussian, 1.0, 2);
  const FrequencyMatrix other = draw_frequencies(3, 21, RadiusLaw::gaussian, 1.0, 2);
  const Sketch s = planted_sketch(Matrix::Ones(3, 1), GmmHyperparams::uniform(1, 0.5), f);
  EngineConfig config;
  config.clusters = 2;
  EXPECT_THROW(run(s, other, config), Error);
  EXPECT_THROW(run(s, f, config, Matrix::Zero(4, 2)), Error);
}

TEST(Step, IdentityDenoisersClampQs) {
  const Index m = 64, n = 8, k = 2;
  const FrequencyMatrix f = draw_frequencies(n, m, RadiusLaw::gaussian, 1.0, 3);
  const Sketch s = planted_sketch(Matrix::Ones(n, k), GmmHyperparams::uniform(k, 0.5), f);
  const Initialization init = default_init(s, f, k, 4);
  EngineState state = make_state(init.centroids, init.qc, m);
  GmmHyperparams h = init.hyper;
  EngineConfig config;
  config.clusters = k;
  StepHooks hooks;
  hooks.denoise_z = [](Complex, const PseudoPriorZ& p, const GmmHyperparams&, double) {
    return PosteriorMomentsZ{p.mean, p.variance};
  };
  hooks.denoise_c = [](const Vector& r, const Vector& q, double) { return PosteriorMomentsC{r, q}; };
  const IterationRecord rec = step(state, s.values, f, h, config, false, &hooks);
  EXPECT_EQ(rec.qs_clamps, k);
  for (Index j = 0; j < k; ++j) EXPECT_EQ(state.qs[j], config.variance_floor);
  EXPECT_TRUE(state.qr.allFinite());
  EXPECT_TRUE(state.chat.allFinite());
}

TEST(Step, ShapesAndPositivityPreservedOver100Steps) {
  const Index m = 64, n = 8, k = 2;
  const SyntheticDataset d = gen_gmm({k, n, 2000, 0, 8});
  const FrequencyMatrix f = draw_frequencies(n, m, RadiusLaw::adapted_radius, estimate_scale(d.train, 1), 9);
  const Sketch s = compute_sketch(d.train, f);
  const Initialization init = default_init(s, f, k, 10);
  EngineState state = make_state(init.centroids, init.qc, m);
  GmmHyperparams h = init.hyper;
  EngineConfig config;
  config.clusters = k;
  for (int i = 0; i < 100; ++i) {
    step(state, s.values, f, h, config, true);
    ASSERT_EQ(state.chat.rows(), n);
    ASSERT_EQ(state.chat.cols(), k);
    ASSERT_EQ(state.phat.rows(), m);
    ASSERT_EQ(state.zhat.cols(), k);
    ASSERT_EQ(state.qz.rows(), m);
    ASSERT_EQ(state.shat.rows(), m);
    ASSERT_EQ(state.rhat.rows(), n);
    ASSERT_TRUE((state.qp.array() > 0.0).all());
    ASSERT_TRUE((state.qs.array() > 0.0).all());
    ASSERT_TRUE((state.qr.array() > 0.0).all());
    ASSERT_TRUE((state.qc.array() > 0.0).all());
    ASSERT_TRUE(state.chat.allFinite() && state.shat.allFinite() && state.zhat.allFinite());
  }
  EXPECT_EQ(state.iteration, 100);
}
