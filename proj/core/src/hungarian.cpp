#include "skcl/hungarian.hpp"

#include <limits>

namespace skcl {

std::vector<Index> hungarian(const Matrix& cost) {
  const Index n = cost.rows();
  if (n != cost.cols()) throw Error("hungarian: cost matrix must be square");
  if (!cost.allFinite()) throw Error("hungarian: cost matrix has non-finite entries");
  if (n == 0) return {};

  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual source
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  for (Index row = 1; row <= n; ++row) {
    match[0] = row;
    Index col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const Index row0 = match[col0];
      double delta = inf;
      Index col1 = 0;
      for (Index col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double reduced = cost(row0 - 1, col - 1) - u[row0] - v[col];
        if (reduced < minv[col]) {
          minv[col] = reduced;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (Index col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const Index col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<Index> assignment(n, 0);
  for (Index col = 1; col <= n; ++col) assignment[match[col] - 1] = col - 1;
  return assignment;
}

double assignment_cost(const Matrix& cost, const std::vector<Index>& assignment) {
  double total = 0.0;
  for (std::size_t row = 0; row < assignment.size(); ++row) total += cost(static_cast<Index>(row), assignment[row]);
  return total;
}

}  // namespace skcl
