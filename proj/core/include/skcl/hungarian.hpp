#pragma once

#include <vector>

#include "skcl/types.hpp"

namespace skcl {

// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
// potentials, O(K^3)). Returns assignment[row] = column.
std::vector<Index> hungarian(const Matrix& cost);

double assignment_cost(const Matrix& cost, const std::vector<Index>& assignment);

}  // namespace skcl
