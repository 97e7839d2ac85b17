#pragma once

#include "aered/core/types.hpp"

namespace aered {

/// Euclidean projection of a vector onto {x >= 0, sum x = 1}.
void project_simplex(Eigen::Ref<Vector> v);

/// Projects every column of `m` onto the unit simplex. Throws ValueError on non-finite input.
AbundanceMatrix project_simplex_columns(const Matrix& m);

}  // namespace aered
