#include "aered/core/types.hpp"

#include "aered/core/error.hpp"

#include <cmath>
#include <string>

namespace aered {

HyperspectralImage::HyperspectralImage(Matrix data, Grid grid) : data_(std::move(data)), grid_(grid) {
  if (grid_.height < 1 || grid_.width < 1) {
    throw DimensionError("image grid must be at least 1x1");
  }
  if (grid_.pixels() != data_.cols()) {
    throw DimensionError("image has " + std::to_string(data_.cols()) + " pixel columns but grid is " +
                         std::to_string(grid_.height) + "x" + std::to_string(grid_.width));
  }
  if (!data_.allFinite()) {
    throw ValueError("image contains non-finite values");
  }
}

AbundanceMatrix::AbundanceMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1) {
    throw DimensionError("abundance matrix needs at least one endmember row");
  }
  if (!data_.allFinite()) {
    throw ValueError("abundance matrix contains non-finite values");
  }
  const auto v = simplex_violation(data_);
  if (v.negativity < 0.0) {
    throw ValueError("abundance nonnegativity violated (min entry " + std::to_string(v.negativity) + ")");
  }
  if (v.sum_error > kSumTolerance) {
    throw ValueError("abundance sum-to-one violated (max deviation " + std::to_string(v.sum_error) + ")");
  }
}

AbundanceMatrix AbundanceMatrix::permuted_rows(const std::vector<Index>& perm) const {
  if (static_cast<Index>(perm.size()) != data_.rows()) {
    throw DimensionError("permutation length does not match endmember count");
  }
  Matrix out(data_.rows(), data_.cols());
  for (Index r = 0; r < data_.rows(); ++r) out.row(r) = data_.row(perm[r]);
  return AbundanceMatrix(std::move(out));
}

EndmemberMatrix::EndmemberMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw DimensionError("endmember matrix must be nonempty");
  }
  if (!data_.allFinite()) {
    throw ValueError("endmember matrix contains non-finite values");
  }
  if (data_.minCoeff() < 0.0) {
    throw ValueError("endmember nonnegativity violated");
  }
  for (Index r = 0; r < data_.cols(); ++r) {
    if (data_.col(r).maxCoeff() <= 0.0) {
      throw ValueError("endmember column " + std::to_string(r) + " is all zero");
    }
  }
}

EndmemberMatrix EndmemberMatrix::permuted_columns(const std::vector<Index>& perm) const {
  if (static_cast<Index>(perm.size()) != data_.cols()) {
    throw DimensionError("permutation length does not match endmember count");
  }
  Matrix out(data_.rows(), data_.cols());
  for (Index r = 0; r < data_.cols(); ++r) out.col(r) = data_.col(perm[r]);
  return EndmemberMatrix(std::move(out));
}

SimplexViolation simplex_violation(const Matrix& m) {
  SimplexViolation v;
  if (m.size() == 0) return v;
  v.sum_error = (m.colwise().sum().array() - 1.0).abs().maxCoeff();
  v.negativity = std::min(0.0, m.minCoeff());
  return v;
}

}  // namespace aered
