#pragma once

#include "aered/core/types.hpp"

#include <json.hpp>

namespace aered::denoise {

enum class Kind { identity, box, nlm };

struct NlmParams {
  Index patch_radius = 1;   // 3x3 patches
  Index window_radius = 5;  // 11x11 search window
  double h = 0.1;           // filtering strength, abundance units
};

struct BoxParams {
  Index radius = 1;
};

struct DenoiserSpec {
  Kind kind = Kind::nlm;
  NlmParams nlm;
  BoxParams box;

  void validate() const;
};

/// {"kind": "nlm"|"box"|"identity", "patch_radius", "window_radius", "h", "radius"}.
DenoiserSpec denoiser_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DenoiserSpec& spec);
const char* kind_name(Kind kind);

/// Non-local means on one H x W band. Patch distance is the mean squared
/// difference over the (2p+1)^2 patch (reflect padded); weights are
/// exp(-d/h^2) over the search window clipped to the image, self included.
Matrix nlm_denoise_band(const Matrix& band, Index patch_radius, Index window_radius, double h);

/// Mean over the (2r+1)^2 window with half-sample symmetric (edge-repeating)
/// reflection. This operator is linear and symmetric.
Matrix box_denoise_band(const Matrix& band, Index radius);

/// Applies the 2-D denoiser to each row of the R x N matrix viewed as an image
/// on `grid`. Channels may run on up to `threads` threads; the result does not
/// depend on the thread count. No simplex re-projection is applied.
Matrix denoise(const Matrix& channels, Grid grid, const DenoiserSpec& spec, int threads = 1);

/// Row r of `channels` as an H x W image, and back.
Matrix channel_image(const Matrix& channels, Index r, Grid grid);
void store_channel(const Matrix& image, Index r, Grid grid, Matrix& channels);

/// Regularization by denoising: (1/2) <A, A - C(A)>.
double red_value(const Matrix& A, Grid grid, const DenoiserSpec& spec, int threads = 1);
/// Denoising residual A - C(A).
Matrix red_gradient(const Matrix& A, Grid grid, const DenoiserSpec& spec, int threads = 1);

}  // namespace aered::denoise
