#pragma once

#include <vector>

#include "skcl/frequencies.hpp"
#include "skcl/gmm.hpp"
#include "skcl/types.hpp"

namespace skcl {

// Samples of the empirical characteristic function,
//   y_m = (1/T) sum_t exp(j w_m^T x_t),
// together with the provenance needed to regenerate W.
struct Sketch {
  ComplexVector values;
  FrequencyProvenance frequencies;
  Index sample_count = 0;

  Index size() const { return values.size(); }
  Index dim() const { return frequencies.dim; }
};

// Columns are processed in fixed chunks of this many samples; chunk sums are
// combined by a pairwise tree over chunk index, so results do not depend on the
// number of worker threads.
inline constexpr Index kSketchChunk = 4096;

Sketch compute_sketch(const DataMatrix& data, const FrequencyMatrix& freqs, Index chunk = kSketchChunk);

// Streaming form of compute_sketch: feed column blocks in order, then finish().
class SketchAccumulator {
 public:
  explicit SketchAccumulator(const FrequencyMatrix& freqs);

  void add(const DataMatrix& block);
  Index sample_count() const { return samples_; }
  Sketch finish() const;

 private:
  FrequencyProvenance provenance_;
  Matrix dense_w_;
  std::vector<ComplexVector> partial_sums_;
  Index samples_ = 0;
};

// Weighted merge of two sketches over disjoint data drawn with the same frequencies.
Sketch merge_sketches(const Sketch& a, const Sketch& b);

// Large-T sketch of the mixture: sum_k alpha_k exp(j g_m z_mk - g_m^2 tau_k / 2),
// z_mk = w~_m^T c_k.
ComplexVector analytic_sketch(const Centroids& centroids, const GmmHyperparams& hyper, const FrequencyMatrix& freqs);

// sum_m |y_m - yhat_m|^2 against the analytic sketch of (centroids, hyper).
double sketch_residual(const ComplexVector& y, const Centroids& centroids, const GmmHyperparams& hyper,
                       const FrequencyMatrix& freqs);

}  // namespace skcl
