#pragma once

#include <cstdint>
#include <vector>

#include "skcl/rng.hpp"
#include "skcl/types.hpp"

namespace skcl {

// sum_t min_k ||x_t - c_k||^2
double sse(const DataMatrix& data, const Centroids& centroids);

// Index of the nearest centroid for every sample (ties go to the lowest index).
std::vector<Index> assign_nearest(const DataMatrix& data, const Centroids& centroids);

// D^2-weighted seeding.
Centroids kmeanspp_seed(const DataMatrix& data, Index clusters, Rng& rng);

struct LloydResult {
  Centroids centroids;
  // SSE of the centroids entering each iteration, then of the final centroids
  std::vector<double> sse_trace;
  int iterations = 0;
};

// Lloyd iterations until the centroid move (Frobenius) is <= tol or max_iters.
// An empty cluster is re-seeded at the sample farthest from its own centroid.
LloydResult lloyd(const DataMatrix& data, Centroids init, double tol = 1e-9, int max_iters = 300);

struct KMeansOptions {
  int replicates = 1;
  double subsample_rate = 1.0;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  int max_iters = 300;
};

struct KMeansResult {
  Centroids centroids;
  double subsample_sse = 0.0;
  int best_replicate = 0;
  std::vector<double> replicate_sse;
};

// k-means++ with per-replicate column subsampling; the replicate with the lowest
// SSE on its own subsample wins.
KMeansResult kmeans_pp(const DataMatrix& data, Index clusters, const KMeansOptions& options = {});

}  // namespace skcl
