#pragma once

#include "aered/core/types.hpp"

namespace aered {

/// Linear mixing: returns S*A with the given spatial grid.
/// Throws DimensionError when S.cols() != A.rows() or grid does not cover A's columns.
HyperspectralImage lmm_mix(const EndmemberMatrix& S, const AbundanceMatrix& A, Grid grid);

/// Same product on raw matrices (shared by the autoencoder decoder).
Matrix lmm_product(const Matrix& S, const Matrix& A);

}  // namespace aered
