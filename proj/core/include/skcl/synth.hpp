#pragma once

#include <cstdint>
#include <vector>

#include "skcl/types.hpp"

namespace skcl {

// Synthetic mixture: centers c_k ~ N(0, 1.5^2 K^(2/N) I), equal weights 1/K and
// identity covariances.
struct SynthSpec {
  Index k = 5;
  Index n = 20;
  Index t = 10000;
  Index test_t = 100000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticDataset {
  DataMatrix train;
  DataMatrix test;
  Centroids means;
  std::vector<Index> train_labels;
  std::vector<Index> test_labels;
};

double center_variance(Index k, Index n);

// Centers, training samples and test samples come from separate derived streams.
SyntheticDataset gen_gmm(const SynthSpec& spec);

}  // namespace skcl
