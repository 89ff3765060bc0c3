#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "skcl/types.hpp"

namespace skcl {

enum class RadiusLaw {
  // radius = chi_N / scale, i.e. w ~ N(0, scale^-2 I)
  gaussian,
  // radius = R / scale with p(R) proportional to R sqrt(R^2 + R^4/4) exp(-R^2/2)
  adapted_radius,
};

std::string_view to_string(RadiusLaw law);
RadiusLaw parse_radius_law(std::string_view name);

// Everything needed to regenerate a frequency matrix bit-exactly.
struct FrequencyProvenance {
  std::uint64_t seed = 0;
  RadiusLaw law = RadiusLaw::gaussian;
  double scale = 1.0;
  Index count = 0;  // M
  Index dim = 0;    // N

  bool operator==(const FrequencyProvenance&) const = default;
};

// The M x N frequency matrix W stored factored as W = Diag(g) * W~, with unit
// rows w~_m and positive radii g_m.
class FrequencyMatrix {
 public:
  FrequencyMatrix(Matrix directions, Vector radii, FrequencyProvenance provenance);

  Index count() const { return directions_.rows(); }
  Index dim() const { return directions_.cols(); }

  const Matrix& directions() const { return directions_; }
  const Vector& radii() const { return radii_; }
  const FrequencyProvenance& provenance() const { return provenance_; }

  // Dense W, row m = g_m * w~_m.
  Matrix dense() const;

 private:
  Matrix directions_;
  Vector radii_;
  FrequencyProvenance provenance_;
};

FrequencyMatrix draw_frequencies(Index dim, Index count, RadiusLaw law, double scale, std::uint64_t seed);
FrequencyMatrix regenerate(const FrequencyProvenance& provenance);

// Inverse-CDF sample of the adapted-radius density (unit scale) at u in [0, 1].
double adapted_radius_quantile(double u);

// Square root of the mean per-coordinate variance of a uniform subsample of at
// most `subsample` columns. Throws "degenerate scale" when that variance is 0.
double estimate_scale(const DataMatrix& data, std::uint64_t seed, Index subsample = 1000);

}  // namespace skcl
