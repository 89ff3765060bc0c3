#include "skcl/frequencies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "skcl/rng.hpp"

namespace skcl {

namespace {

constexpr double kRadiusTableMax = 12.0;
constexpr int kRadiusTableSize = 8192;

double adapted_radius_density(double r) {
  return r * std::sqrt(r * r + 0.25 * r * r * r * r) * std::exp(-0.5 * r * r);
}

// Normalized CDF of the adapted-radius density on a uniform grid over
// [0, kRadiusTableMax], trapezoid rule.
const std::vector<double>& adapted_radius_cdf() {
  static const std::vector<double> table = [] {
    std::vector<double> cdf(kRadiusTableSize + 1, 0.0);
    const double h = kRadiusTableMax / kRadiusTableSize;
    double previous = adapted_radius_density(0.0);
    for (int i = 1; i <= kRadiusTableSize; ++i) {
      const double current = adapted_radius_density(h * i);
      cdf[i] = cdf[i - 1] + 0.5 * h * (previous + current);
      previous = current;
    }
    const double total = cdf.back();
    for (double& c : cdf) c /= total;
    return cdf;
  }();
  return table;
}

}  // namespace

std::string_view to_string(RadiusLaw law) {
  switch (law) {
    case RadiusLaw::gaussian:
      return "gaussian";
    case RadiusLaw::adapted_radius:
      return "adapted_radius";
  }
  return "unknown";
}

RadiusLaw parse_radius_law(std::string_view name) {
  if (name == "gaussian") return RadiusLaw::gaussian;
  if (name == "adapted_radius") return RadiusLaw::adapted_radius;
  throw Error("unknown radius law '" + std::string(name) + "'");
}

FrequencyMatrix::FrequencyMatrix(Matrix directions, Vector radii, FrequencyProvenance provenance)
    : directions_(std::move(directions)), radii_(std::move(radii)), provenance_(provenance) {
  if (directions_.rows() != radii_.size()) throw Error("frequency directions and radii disagree on M");
}

Matrix FrequencyMatrix::dense() const { return radii_.asDiagonal() * directions_; }

double adapted_radius_quantile(double u) {
  const auto& cdf = adapted_radius_cdf();
  u = std::clamp(u, 0.0, 1.0);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) return kRadiusTableMax;
  const auto hi = static_cast<int>(it - cdf.begin());
  const int lo = hi - 1;
  const double h = kRadiusTableMax / kRadiusTableSize;
  const double span = cdf[hi] - cdf[lo];
  const double frac = span > 0.0 ? (u - cdf[lo]) / span : 0.0;
  return h * (lo + frac);
}

FrequencyMatrix draw_frequencies(Index dim, Index count, RadiusLaw law, double scale, std::uint64_t seed) {
  if (dim < 1 || count < 1) throw Error("frequency matrix needs N >= 1 and M >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error("frequency scale must be positive and finite");

  Rng rng(seed);
  Matrix directions(count, dim);
  Vector radii(count);
  Vector draw(dim);
  for (Index m = 0; m < count; ++m) {
    double norm = 0.0;
    do {
      for (Index n = 0; n < dim; ++n) draw[n] = rng.normal();
      norm = draw.norm();
    } while (norm == 0.0);
    directions.row(m) = draw.transpose() / norm;
    switch (law) {
      case RadiusLaw::gaussian:
        radii[m] = norm / scale;
        break;
      case RadiusLaw::adapted_radius: {
        double r = 0.0;
        while (r <= 0.0) r = adapted_radius_quantile(rng.uniform_open());
        radii[m] = r / scale;
        break;
      }
    }
  }
  return FrequencyMatrix(std::move(directions), std::move(radii), {seed, law, scale, count, dim});
}

FrequencyMatrix regenerate(const FrequencyProvenance& provenance) {
  return draw_frequencies(provenance.dim, provenance.count, provenance.law, provenance.scale, provenance.seed);
}

double estimate_scale(const DataMatrix& data, std::uint64_t seed, Index subsample) {
  validate_data(data);
  const Index total = data.cols();
  const Index take = std::min(total, std::max<Index>(subsample, 1));

  // partial Fisher-Yates over column indices
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  for (Index i = 0; i < take; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(total - i)));
    std::swap(order[i], order[j]);
  }

  Matrix picked(data.rows(), take);
  for (Index i = 0; i < take; ++i) picked.col(i) = data.col(order[i]);
  const Vector mean = picked.rowwise().mean();
  const double variance = (picked.colwise() - mean).squaredNorm() / static_cast<double>(take * data.rows());
  // identical points can leave round-off residue in the mean
  const double level = mean.squaredNorm() / static_cast<double>(data.rows());
  if (!(variance > 1e-24 * level) || variance == 0.0) {
    throw Error("degenerate scale: subsample has zero variance");
  }
  return std::sqrt(variance);
}

}  // namespace skcl
