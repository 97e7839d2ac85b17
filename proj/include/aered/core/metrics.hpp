#pragma once

#include "aered/core/types.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace aered {

/// Root mean square abundance error over all N*R entries.
double rmse(const AbundanceMatrix& truth, const AbundanceMatrix& estimate);

/// Spectral angle between two spectra, in radians.
double spectral_angle(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Permutation `perm` minimizing sum_r SAD(truth[:, r], estimate[:, perm[r]]).
/// Exhaustive for R <= 8, greedy by smallest remaining angle beyond that.
std::vector<Index> align_endmembers(const EndmemberMatrix& truth, const EndmemberMatrix& estimate);

/// Mean spectral angle distance after alignment (radians).
double msad(const EndmemberMatrix& truth, const EndmemberMatrix& estimate);

/// Mean spectral information divergence after SAD alignment (natural log, floor 1e-12).
double msid(const EndmemberMatrix& truth, const EndmemberMatrix& estimate);

/// Metrics on already-paired columns (no alignment).
double msad_paired(const EndmemberMatrix& truth, const EndmemberMatrix& estimate);
double msid_paired(const EndmemberMatrix& truth, const EndmemberMatrix& estimate);

/// 10 log10(MAX^2 / MSE), MAX = max entry of `reconstruction`. +inf when MSE is zero.
double psnr(const HyperspectralImage& reference, const HyperspectralImage& reconstruction);
double psnr(const Matrix& reference, const Matrix& reconstruction);

struct UnmixingMetrics {
  std::optional<double> rmse;
  std::optional<double> msad;
  std::optional<double> msid;
  double psnr = std::numeric_limits<double>::quiet_NaN();
  std::vector<Index> permutation;  // estimate column for each true endmember
};

/// Scores an unmixing result. Endmembers are aligned by SAD and the same
/// permutation reorders the estimated abundance rows before RMSE. PSNR compares
/// S_est*A_est against `reference` (the clean image when known).
UnmixingMetrics evaluate_unmixing(const Matrix& reference, const AbundanceMatrix& A_est,
                                  const EndmemberMatrix& S_est,
                                  const AbundanceMatrix* A_true, const EndmemberMatrix* S_true);

}  // namespace aered
