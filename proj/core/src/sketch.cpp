#include "skcl/sketch.hpp"

#include <cmath>

namespace skcl {

namespace {

// Sum over columns of exp(j W x_t) for one block of samples.
ComplexVector block_sum(const Matrix& dense_w, const Eigen::Ref<const Matrix>& block) {
  const Matrix phases = dense_w * block;
  ComplexVector sum = ComplexVector::Zero(dense_w.rows());
  for (Index t = 0; t < phases.cols(); ++t) {
    for (Index m = 0; m < phases.rows(); ++m) {
      const double p = phases(m, t);
      sum[m] += Complex(std::cos(p), std::sin(p));
    }
  }
  return sum;
}

// Pairwise tree over index: ((s0+s1)+(s2+s3))+...
ComplexVector tree_reduce(std::vector<ComplexVector> parts, Index m) {
  if (parts.empty()) return ComplexVector::Zero(m);
  while (parts.size() > 1) {
    std::vector<ComplexVector> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(parts[i] + parts[i + 1]);
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

void check_dims(const DataMatrix& data, const FrequencyMatrix& freqs) {
  if (data.rows() != freqs.dim()) {
    throw Error("dimension mismatch: data has N=" + std::to_string(data.rows()) + ", frequencies have N=" +
                std::to_string(freqs.dim()));
  }
}

}  // namespace

Sketch compute_sketch(const DataMatrix& data, const FrequencyMatrix& freqs, Index chunk) {
  validate_data(data);
  check_dims(data, freqs);
  if (chunk < 1) throw Error("sketch chunk size must be positive");

  const Matrix dense_w = freqs.dense();
  const Index total = data.cols();
  const Index blocks = (total + chunk - 1) / chunk;
  std::vector<ComplexVector> sums(static_cast<std::size_t>(blocks));

#pragma omp parallel for schedule(dynamic)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * chunk;
    const Index width = std::min(chunk, total - start);
    sums[static_cast<std::size_t>(b)] = block_sum(dense_w, data.middleCols(start, width));
  }

  Sketch sketch;
  sketch.values = tree_reduce(std::move(sums), freqs.count()) / static_cast<double>(total);
  sketch.frequencies = freqs.provenance();
  sketch.sample_count = total;
  return sketch;
}

SketchAccumulator::SketchAccumulator(const FrequencyMatrix& freqs)
    : provenance_(freqs.provenance()), dense_w_(freqs.dense()) {}

void SketchAccumulator::add(const DataMatrix& block) {
  if (block.cols() == 0) return;
  validate_data(block);
  if (block.rows() != dense_w_.cols()) throw Error("dimension mismatch in streamed sketch block");
  partial_sums_.push_back(block_sum(dense_w_, block));
  samples_ += block.cols();
}

Sketch SketchAccumulator::finish() const {
  if (samples_ == 0) throw Error("cannot finish a sketch over zero samples");
  Sketch sketch;
  sketch.values = tree_reduce(partial_sums_, dense_w_.rows()) / static_cast<double>(samples_);
  sketch.frequencies = provenance_;
  sketch.sample_count = samples_;
  return sketch;
}

Sketch merge_sketches(const Sketch& a, const Sketch& b) {
  if (!(a.frequencies == b.frequencies) || a.size() != b.size()) {
    throw Error("cannot merge sketches with mismatched frequency provenance");
  }
  if (b.sample_count == 0) return a;
  if (a.sample_count == 0) return b;
  const double total = static_cast<double>(a.sample_count + b.sample_count);
  Sketch merged;
  merged.values = (static_cast<double>(a.sample_count) / total) * a.values +
                  (static_cast<double>(b.sample_count) / total) * b.values;
  merged.frequencies = a.frequencies;
  merged.sample_count = a.sample_count + b.sample_count;
  return merged;
}

ComplexVector analytic_sketch(const Centroids& centroids, const GmmHyperparams& hyper, const FrequencyMatrix& freqs) {
  validate(hyper);
  if (centroids.rows() != freqs.dim() || centroids.cols() != hyper.clusters()) {
    throw Error("analytic_sketch: centroid shape does not match frequencies/hyperparameters");
  }
  const Matrix z = freqs.directions() * centroids;
  const Vector& g = freqs.radii();
  ComplexVector out = ComplexVector::Zero(freqs.count());
  for (Index m = 0; m < z.rows(); ++m) {
    Complex acc = 0.0;
    for (Index k = 0; k < z.cols(); ++k) {
      const double magnitude = hyper.alpha[k] * std::exp(-0.5 * g[m] * g[m] * hyper.tau[k]);
      const double phase = g[m] * z(m, k);
      acc += Complex(magnitude * std::cos(phase), magnitude * std::sin(phase));
    }
    out[m] = acc;
  }
  return out;
}

double sketch_residual(const ComplexVector& y, const Centroids& centroids, const GmmHyperparams& hyper,
                       const FrequencyMatrix& freqs) {
  if (y.size() != freqs.count()) throw Error("sketch_residual: sketch length does not match frequencies");
  return (y - analytic_sketch(centroids, hyper, freqs)).squaredNorm();
}

}  // namespace skcl
