#include "skcl/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace skcl {

namespace {

void check_shapes(const DataMatrix& data, const Centroids& centroids) {
  if (data.rows() != centroids.rows()) {
    throw Error("dimension mismatch: data has N=" + std::to_string(data.rows()) + ", centroids have N=" +
                std::to_string(centroids.rows()));
  }
  if (centroids.cols() < 1) throw Error("need at least one centroid");
}

struct Nearest {
  Index index;
  double distance;
};

Nearest nearest(const DataMatrix& data, Index t, const Centroids& centroids) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (Index k = 0; k < centroids.cols(); ++k) {
    const double d = (data.col(t) - centroids.col(k)).squaredNorm();
    if (d < best.distance) best = {k, d};
  }
  return best;
}

}  // namespace

double sse(const DataMatrix& data, const Centroids& centroids) {
  check_shapes(data, centroids);
  double total = 0.0;
  for (Index t = 0; t < data.cols(); ++t) total += nearest(data, t, centroids).distance;
  return total;
}

std::vector<Index> assign_nearest(const DataMatrix& data, const Centroids& centroids) {
  check_shapes(data, centroids);
  std::vector<Index> labels(static_cast<std::size_t>(data.cols()));
  for (Index t = 0; t < data.cols(); ++t) labels[t] = nearest(data, t, centroids).index;
  return labels;
}

Centroids kmeanspp_seed(const DataMatrix& data, Index clusters, Rng& rng) {
  const Index total = data.cols();
  if (clusters < 1 || clusters > total) throw Error("k-means++: K must be between 1 and the sample count");
  Centroids centroids(data.rows(), clusters);
  centroids.col(0) = data.col(static_cast<Index>(rng.below(static_cast<std::uint64_t>(total))));

  std::vector<double> d2(static_cast<std::size_t>(total));
  for (Index t = 0; t < total; ++t) d2[t] = (data.col(t) - centroids.col(0)).squaredNorm();

  for (Index k = 1; k < clusters; ++k) {
    const double mass = std::accumulate(d2.begin(), d2.end(), 0.0);
    Index pick = 0;
    if (mass > 0.0) {
      const double target = rng.uniform() * mass;
      double running = 0.0;
      pick = total - 1;
      for (Index t = 0; t < total; ++t) {
        running += d2[t];
        if (running > target) {
          pick = t;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(total)));
    }
    centroids.col(k) = data.col(pick);
    for (Index t = 0; t < total; ++t) d2[t] = std::min(d2[t], (data.col(t) - centroids.col(k)).squaredNorm());
  }
  return centroids;
}

LloydResult lloyd(const DataMatrix& data, Centroids init, double tol, int max_iters) {
  check_shapes(data, init);
  const Index clusters = init.cols();
  const Index total = data.cols();
  LloydResult result;
  result.centroids = std::move(init);

  std::vector<Nearest> assignment(static_cast<std::size_t>(total));
  for (int it = 0; it < max_iters; ++it) {
    double current = 0.0;
    for (Index t = 0; t < total; ++t) {
      assignment[t] = nearest(data, t, result.centroids);
      current += assignment[t].distance;
    }
    result.sse_trace.push_back(current);

    Centroids sums = Centroids::Zero(data.rows(), clusters);
    std::vector<Index> counts(static_cast<std::size_t>(clusters), 0);
    for (Index t = 0; t < total; ++t) {
      sums.col(assignment[t].index) += data.col(t);
      ++counts[assignment[t].index];
    }
    Centroids next = result.centroids;
    std::vector<bool> taken(static_cast<std::size_t>(total), false);
    for (Index k = 0; k < clusters; ++k) {
      if (counts[k] > 0) {
        next.col(k) = sums.col(k) / static_cast<double>(counts[k]);
        continue;
      }
      Index far = -1;
      double worst = -1.0;
      for (Index t = 0; t < total; ++t) {
        if (!taken[t] && assignment[t].distance > worst) {
          worst = assignment[t].distance;
          far = t;
        }
      }
      if (far >= 0) {
        taken[far] = true;
        next.col(k) = data.col(far);
      }
    }
    const double move = (next - result.centroids).norm();
    result.centroids = std::move(next);
    result.iterations = it + 1;
    if (move <= tol) break;
  }
  result.sse_trace.push_back(sse(data, result.centroids));
  return result;
}

KMeansResult kmeans_pp(const DataMatrix& data, Index clusters, const KMeansOptions& options) {
  validate_data(data);
  if (options.replicates < 1) throw Error("k-means++: need at least one replicate");
  if (!(options.subsample_rate > 0.0 && options.subsample_rate <= 1.0)) {
    throw Error("k-means++: subsample rate must lie in (0, 1]");
  }
  const Index total = data.cols();
  const auto take = std::max<Index>(1, static_cast<Index>(std::llround(options.subsample_rate * static_cast<double>(total))));
  if (clusters < 1 || clusters > take) {
    throw Error("k-means++: K=" + std::to_string(clusters) + " exceeds the " + std::to_string(take) +
                " available samples");
  }

  KMeansResult result;
  result.subsample_sse = std::numeric_limits<double>::infinity();
  std::vector<Index> order(static_cast<std::size_t>(total));
  for (int r = 0; r < options.replicates; ++r) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    DataMatrix subset;
    if (take == total) {
      subset = data;
    } else {
      std::iota(order.begin(), order.end(), Index{0});
      for (Index i = 0; i < take; ++i) {
        const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(total - i)));
        std::swap(order[i], order[j]);
      }
      subset.resize(data.rows(), take);
      for (Index i = 0; i < take; ++i) subset.col(i) = data.col(order[i]);
    }
    LloydResult fit = lloyd(subset, kmeanspp_seed(subset, clusters, rng), options.tol, options.max_iters);
    const double score = fit.sse_trace.back();
    result.replicate_sse.push_back(score);
    if (score < result.subsample_sse) {
      result.subsample_sse = score;
      result.centroids = std::move(fit.centroids);
      result.best_replicate = r;
    }
  }
  return result;
}

}  // namespace skcl
