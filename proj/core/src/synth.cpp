#include "skcl/synth.hpp"

#include <cmath>

#include "skcl/rng.hpp"

namespace skcl {

namespace {

void draw_samples(const Centroids& means, Index count, Rng& rng, DataMatrix& out, std::vector<Index>& labels) {
  const Index dim = means.rows();
  const auto clusters = static_cast<std::uint64_t>(means.cols());
  out.resize(dim, count);
  labels.resize(static_cast<std::size_t>(count));
  for (Index t = 0; t < count; ++t) {
    const auto label = static_cast<Index>(rng.below(clusters));
    labels[t] = label;
    for (Index n = 0; n < dim; ++n) out(n, t) = means(n, label) + rng.normal();
  }
}

}  // namespace

void SynthSpec::validate() const {
  if (k < 1 || n < 1 || t < 1 || test_t < 0) throw Error("synthetic spec needs K, N, T >= 1");
}

double center_variance(Index k, Index n) {
  return 1.5 * 1.5 * std::pow(static_cast<double>(k), 2.0 / static_cast<double>(n));
}

SyntheticDataset gen_gmm(const SynthSpec& spec) {
  spec.validate();
  SyntheticDataset out;
  Rng center_rng(derive_seed(spec.seed, 0));
  const double sd = std::sqrt(center_variance(spec.k, spec.n));
  out.means.resize(spec.n, spec.k);
  for (Index k = 0; k < spec.k; ++k) {
    for (Index n = 0; n < spec.n; ++n) out.means(n, k) = sd * center_rng.normal();
  }
  Rng train_rng(derive_seed(spec.seed, 1));
  draw_samples(out.means, spec.t, train_rng, out.train, out.train_labels);
  Rng test_rng(derive_seed(spec.seed, 2));
  draw_samples(out.means, spec.test_t, test_rng, out.test, out.test_labels);
  return out;
}

}  // namespace skcl
