#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace aered {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Spatial shape of an image. Pixel (row i, col j) maps to column i*width + j.
struct Grid {
  Index height = 0;
  Index width = 0;

  Index pixels() const { return height * width; }
  Index index(Index i, Index j) const { return i * width + j; }
  friend bool operator==(const Grid&, const Grid&) = default;
};

/// B bands x N pixels, pixels stored as columns.
class HyperspectralImage {
 public:
  HyperspectralImage() = default;
  HyperspectralImage(Matrix data, Grid grid);

  const Matrix& data() const { return data_; }
  Grid grid() const { return grid_; }
  Index bands() const { return data_.rows(); }
  Index pixels() const { return data_.cols(); }
  Index height() const { return grid_.height; }
  Index width() const { return grid_.width; }

 private:
  Matrix data_;
  Grid grid_;
};

/// R x N abundances. Every column lies on the probability simplex.
class AbundanceMatrix {
 public:
  static constexpr double kSumTolerance = 1e-9;

  AbundanceMatrix() = default;
  /// Validates ANC and ASC; throws ValueError otherwise.
  explicit AbundanceMatrix(Matrix data);

  const Matrix& data() const { return data_; }
  Index endmembers() const { return data_.rows(); }
  Index pixels() const { return data_.cols(); }

  /// Reorders rows so that row r of the result is row perm[r] of this.
  AbundanceMatrix permuted_rows(const std::vector<Index>& perm) const;

 private:
  Matrix data_;
};

/// B x R endmember spectra. Nonnegative, no all-zero column.
class EndmemberMatrix {
 public:
  EndmemberMatrix() = default;
  explicit EndmemberMatrix(Matrix data);

  const Matrix& data() const { return data_; }
  Index bands() const { return data_.rows(); }
  Index endmembers() const { return data_.cols(); }

  EndmemberMatrix permuted_columns(const std::vector<Index>& perm) const;

 private:
  Matrix data_;
};

/// Max absolute deviation of column sums from one, and the most negative entry (0 if none).
struct SimplexViolation {
  double sum_error = 0.0;
  double negativity = 0.0;
};
SimplexViolation simplex_violation(const Matrix& m);

}  // namespace aered
