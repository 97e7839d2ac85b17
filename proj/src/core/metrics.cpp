#include "aered/core/metrics.hpp"

#include "aered/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aered {
namespace {

constexpr double kSidFloor = 1e-12;
constexpr Index kExhaustiveAlignmentLimit = 8;

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
}

Matrix angle_table(const Matrix& truth, const Matrix& est) {
  Matrix table(truth.cols(), est.cols());
  for (Index r = 0; r < truth.cols(); ++r)
    for (Index c = 0; c < est.cols(); ++c) table(r, c) = spectral_angle(truth.col(r), est.col(c));
  return table;
}

Vector normalized_spectrum(const Eigen::Ref<const Vector>& s, Index column) {
  const double total = s.sum();
  if (!(total > 0.0)) {
    throw ValueError("msid: endmember column " + std::to_string(column) + " sums to zero");
  }
  return (s / total).cwiseMax(kSidFloor);
}

}  // namespace

double rmse(const AbundanceMatrix& truth, const AbundanceMatrix& estimate) {
  require_same_shape(truth.data(), estimate.data(), "rmse");
  return std::sqrt((truth.data() - estimate.data()).squaredNorm() / static_cast<double>(truth.data().size()));
}

double spectral_angle(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw ValueError("spectral angle: zero-norm spectrum");
  }
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(c);
}

std::vector<Index> align_endmembers(const EndmemberMatrix& truth, const EndmemberMatrix& estimate) {
  require_same_shape(truth.data(), estimate.data(), "endmember alignment");
  const Index R = truth.endmembers();
  const Matrix table = angle_table(truth.data(), estimate.data());

  std::vector<Index> perm(R);
  std::iota(perm.begin(), perm.end(), Index{0});
  if (R <= kExhaustiveAlignmentLimit) {
    std::vector<Index> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (Index r = 0; r < R; ++r) cost += table(r, perm[r]);
      // Strict comparison keeps the lexicographically first optimum.
      if (cost < best_cost) {
        best_cost = cost;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }

  std::vector<bool> row_used(R, false), col_used(R, false);
  for (Index step = 0; step < R; ++step) {
    Index br = -1, bc = -1;
    double bv = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < R; ++r) {
      if (row_used[r]) continue;
      for (Index c = 0; c < R; ++c) {
        if (!col_used[c] && table(r, c) < bv) {
          bv = table(r, c);
          br = r;
          bc = c;
        }
      }
    }
    row_used[br] = col_used[bc] = true;
    perm[br] = bc;
  }
  return perm;
}

double msad_paired(const EndmemberMatrix& truth, const EndmemberMatrix& estimate) {
  require_same_shape(truth.data(), estimate.data(), "msad");
  double total = 0.0;
  for (Index r = 0; r < truth.endmembers(); ++r) {
    total += spectral_angle(truth.data().col(r), estimate.data().col(r));
  }
  return total / static_cast<double>(truth.endmembers());
}

double msid_paired(const EndmemberMatrix& truth, const EndmemberMatrix& estimate) {
  require_same_shape(truth.data(), estimate.data(), "msid");
  double total = 0.0;
  for (Index r = 0; r < truth.endmembers(); ++r) {
    const Vector p = normalized_spectrum(truth.data().col(r), r);
    const Vector q = normalized_spectrum(estimate.data().col(r), r);
    total += (p.array() * (p.array() / q.array()).log()).sum();
  }
  return total / static_cast<double>(truth.endmembers());
}

double msad(const EndmemberMatrix& truth, const EndmemberMatrix& estimate) {
  return msad_paired(truth, estimate.permuted_columns(align_endmembers(truth, estimate)));
}

double msid(const EndmemberMatrix& truth, const EndmemberMatrix& estimate) {
  return msid_paired(truth, estimate.permuted_columns(align_endmembers(truth, estimate)));
}

double psnr(const Matrix& reference, const Matrix& reconstruction) {
  require_same_shape(reference, reconstruction, "psnr");
  const double mse = (reference - reconstruction).squaredNorm() / static_cast<double>(reference.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = reconstruction.maxCoeff();
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const HyperspectralImage& reference, const HyperspectralImage& reconstruction) {
  return psnr(reference.data(), reconstruction.data());
}

UnmixingMetrics evaluate_unmixing(const Matrix& reference, const AbundanceMatrix& A_est,
                                  const EndmemberMatrix& S_est, const AbundanceMatrix* A_true,
                                  const EndmemberMatrix* S_true) {
  UnmixingMetrics m;
  Matrix recon(S_est.bands(), A_est.pixels());
  recon.noalias() = S_est.data() * A_est.data();
  m.psnr = psnr(reference, recon);

  std::vector<Index> perm(S_est.endmembers());
  std::iota(perm.begin(), perm.end(), Index{0});
  if (S_true != nullptr) {
    perm = align_endmembers(*S_true, S_est);
    const EndmemberMatrix aligned = S_est.permuted_columns(perm);
    m.msad = msad_paired(*S_true, aligned);
    m.msid = msid_paired(*S_true, aligned);
  }
  if (A_true != nullptr) {
    m.rmse = rmse(*A_true, A_est.permuted_rows(perm));
  }
  m.permutation = std::move(perm);
  return m;
}

}  // namespace aered
