#include "aered/core/mixing.hpp"

#include "aered/core/error.hpp"

#include <string>

namespace aered {

Matrix lmm_product(const Matrix& S, const Matrix& A) {
  if (S.cols() != A.rows()) {
    throw DimensionError("mixing: endmember matrix has " + std::to_string(S.cols()) +
                         " columns but abundance matrix has " + std::to_string(A.rows()) + " rows");
  }
  Matrix Y(S.rows(), A.cols());
  Y.noalias() = S * A;
  return Y;
}

HyperspectralImage lmm_mix(const EndmemberMatrix& S, const AbundanceMatrix& A, Grid grid) {
  return HyperspectralImage(lmm_product(S.data(), A.data()), grid);
}

}  // namespace aered
