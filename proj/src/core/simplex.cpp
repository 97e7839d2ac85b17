#include "aered/core/simplex.hpp"

#include "aered/core/error.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace aered {

// Sort-based projection: find the shift theta with sum max(v - theta, 0) = 1.
void project_simplex(Eigen::Ref<Vector> v) {
  const Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumsum += sorted[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (k + 1 == n || sorted[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (Index k = 0; k < n; ++k) v[k] = std::max(v[k] - theta, 0.0);
  // Renormalize away the last ulp of drift so ASC holds to machine precision.
  const double s = v.sum();
  if (s > 0.0) v /= s;
}

AbundanceMatrix project_simplex_columns(const Matrix& m) {
  if (!m.allFinite()) {
    throw ValueError("simplex projection: input contains non-finite values");
  }
  Matrix out = m;
  for (Index c = 0; c < out.cols(); ++c) {
    project_simplex(out.col(c));
  }
  return AbundanceMatrix(std::move(out));
}

}  // namespace aered
