#include "aered/denoise/denoisers.hpp"

#include "aered/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

namespace aered::denoise {
namespace {

Index reflect(Index i, Index n) {
  const Index period = 2 * n;
  Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

Matrix reflect_pad(const Matrix& x, Index pad) {
  const Index H = x.rows(), W = x.cols();
  Matrix out(H + 2 * pad, W + 2 * pad);
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = x(reflect(i - pad, H), reflect(j - pad, W));
  return out;
}

Matrix apply_band(const Matrix& band, const DenoiserSpec& spec) {
  switch (spec.kind) {
    case Kind::identity:
      return band;
    case Kind::box:
      return box_denoise_band(band, spec.box.radius);
    case Kind::nlm:
      return nlm_denoise_band(band, spec.nlm.patch_radius, spec.nlm.window_radius, spec.nlm.h);
  }
  throw ValueError("unknown denoiser kind");
}

}  // namespace

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::identity:
      return "identity";
    case Kind::box:
      return "box";
    case Kind::nlm:
      return "nlm";
  }
  return "?";
}

void DenoiserSpec::validate() const {
  if (box.radius < 0) throw ConfigError("denoiser.radius", "must be >= 0");
  if (nlm.patch_radius < 0) throw ConfigError("denoiser.patch_radius", "must be >= 0");
  if (nlm.window_radius < 0) throw ConfigError("denoiser.window_radius", "must be >= 0");
  if (kind == Kind::nlm && !(nlm.h > 0.0 && std::isfinite(nlm.h))) {
    throw ConfigError("denoiser.h", "must be finite and > 0");
  }
}

DenoiserSpec denoiser_from_json(const nlohmann::json& j) {
  DenoiserSpec s;
  if (!j.is_object()) throw ConfigError("denoiser", "expected an object");
  try {
    const std::string kind = j.value("kind", std::string("nlm"));
    if (kind == "nlm") {
      s.kind = Kind::nlm;
    } else if (kind == "box") {
      s.kind = Kind::box;
    } else if (kind == "identity") {
      s.kind = Kind::identity;
    } else {
      throw ConfigError("denoiser.kind", "unknown kind '" + kind + "'");
    }
    s.nlm.patch_radius = j.value("patch_radius", s.nlm.patch_radius);
    s.nlm.window_radius = j.value("window_radius", s.nlm.window_radius);
    s.nlm.h = j.value("h", s.nlm.h);
    s.box.radius = j.value("radius", s.box.radius);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("denoiser", e.what());
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const DenoiserSpec& s) {
  nlohmann::json j{{"kind", kind_name(s.kind)}};
  if (s.kind == Kind::nlm) {
    j["patch_radius"] = s.nlm.patch_radius;
    j["window_radius"] = s.nlm.window_radius;
    j["h"] = s.nlm.h;
  } else if (s.kind == Kind::box) {
    j["radius"] = s.box.radius;
  }
  return j;
}

Matrix nlm_denoise_band(const Matrix& band, Index patch_radius, Index window_radius, double h) {
  const Index H = band.rows(), W = band.cols();
  if (patch_radius < 0 || window_radius < 0) throw ValueError("nlm: radii must be >= 0");
  if (!(h > 0.0)) throw ValueError("nlm: h must be > 0");
  if (H <= 2 * patch_radius || W <= 2 * patch_radius) {
    throw DimensionError("nlm: image " + std::to_string(H) + "x" + std::to_string(W) +
                         " is too small for patch radius " + std::to_string(patch_radius));
  }
  const Index pr = patch_radius;
  const Matrix padded = reflect_pad(band, pr);
  const double inv_patch = 1.0 / static_cast<double>((2 * pr + 1) * (2 * pr + 1));
  const double inv_h2 = 1.0 / (h * h);

  Matrix out(H, W);
  for (Index i = 0; i < H; ++i) {
    const Index i0 = std::max<Index>(0, i - window_radius), i1 = std::min<Index>(H - 1, i + window_radius);
    for (Index j = 0; j < W; ++j) {
      const Index j0 = std::max<Index>(0, j - window_radius), j1 = std::min<Index>(W - 1, j + window_radius);
      double acc = 0.0, wsum = 0.0;
      for (Index qi = i0; qi <= i1; ++qi) {
        for (Index qj = j0; qj <= j1; ++qj) {
          double d = 0.0;
          for (Index a = 0; a <= 2 * pr; ++a) {
            for (Index b = 0; b <= 2 * pr; ++b) {
              const double diff = padded(i + a, j + b) - padded(qi + a, qj + b);
              d += diff * diff;
            }
          }
          const double w = std::exp(-d * inv_patch * inv_h2);
          acc += w * band(qi, qj);
          wsum += w;
        }
      }
      out(i, j) = acc / wsum;
    }
  }
  return out;
}

Matrix box_denoise_band(const Matrix& band, Index radius) {
  if (radius < 0) throw ValueError("box: radius must be >= 0");
  const Index H = band.rows(), W = band.cols();
  const Matrix padded = reflect_pad(band, radius);
  const double inv = 1.0 / static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  Matrix out(H, W);
  for (Index i = 0; i < H; ++i)
    for (Index j = 0; j < W; ++j) out(i, j) = padded.block(i, j, 2 * radius + 1, 2 * radius + 1).sum() * inv;
  return out;
}

Matrix channel_image(const Matrix& channels, Index r, Grid grid) {
  Matrix img(grid.height, grid.width);
  for (Index i = 0; i < grid.height; ++i)
    for (Index j = 0; j < grid.width; ++j) img(i, j) = channels(r, grid.index(i, j));
  return img;
}

void store_channel(const Matrix& image, Index r, Grid grid, Matrix& channels) {
  for (Index i = 0; i < grid.height; ++i)
    for (Index j = 0; j < grid.width; ++j) channels(r, grid.index(i, j)) = image(i, j);
}

Matrix denoise(const Matrix& channels, Grid grid, const DenoiserSpec& spec, int threads) {
  spec.validate();
  if (channels.cols() != grid.pixels()) {
    throw DimensionError("denoise: matrix has " + std::to_string(channels.cols()) + " columns but grid is " +
                         std::to_string(grid.height) + "x" + std::to_string(grid.width));
  }
  if (spec.kind == Kind::identity) return channels;

  const Index R = channels.rows();
  Matrix out(R, channels.cols());
  auto work = [&](Index r) { store_channel(apply_band(channel_image(channels, r, grid), spec), r, grid, out); };

  const Index workers = std::clamp<Index>(threads, 1, R);
  if (workers == 1) {
    for (Index r = 0; r < R; ++r) work(r);
    return out;
  }
  // Each worker owns a fixed strided set of channels; rows never overlap.
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Index r = w; r < R; r += workers) work(r);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

double red_value(const Matrix& A, Grid grid, const DenoiserSpec& spec, int threads) {
  if (spec.kind == Kind::identity) return 0.0;
  return 0.5 * A.cwiseProduct(red_gradient(A, grid, spec, threads)).sum();
}

Matrix red_gradient(const Matrix& A, Grid grid, const DenoiserSpec& spec, int threads) {
  return A - denoise(A, grid, spec, threads);
}

}  // namespace aered::denoise
