#include "aered/admm/artifacts.hpp"

#include <charconv>
#include <sstream>

namespace aered::admm {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json to_json(const AdmmConfig& c) {
  return {{"lambda", c.lambda},
          {"mu", c.mu},
          {"K", c.outer_iterations},
          {"J", c.inner_iterations},
          {"epochs", c.epochs},
          {"lr", c.lr.encoder},
          {"lr_decoder", c.lr.decoder},
          {"seed", c.seed},
          {"R", c.endmembers},
          {"encoder_widths", c.encoder_widths},
          {"denoiser", denoise::to_json(c.denoiser)},
          {"overlap_denoiser", c.overlap_denoiser}};
}

AdmmConfig admm_config_from_json(const nlohmann::json& j, AdmmConfig c) {
  auto get = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(dst);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(key, "wrong type");
    }
  };
  get("lambda", c.lambda);
  get("mu", c.mu);
  get("K", c.outer_iterations);
  get("J", c.inner_iterations);
  get("epochs", c.epochs);
  get("lr", c.lr.encoder);
  get("lr_decoder", c.lr.decoder);
  get("seed", c.seed);
  get("R", c.endmembers);
  get("encoder_widths", c.encoder_widths);
  get("overlap_denoiser", c.overlap_denoiser);
  if (j.contains("denoiser")) c.denoiser = denoise::denoiser_from_json(j.at("denoiser"));
  return c;
}

std::string history_csv(const std::vector<HistoryEntry>& history) {
  std::ostringstream out;
  out << "k,ae_loss,red_value,primal_residual,rmse,msad,msid,psnr,reconstruction,simplex_drift\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& h : history) {
    out << h.k << ',' << format_double(h.ae_loss) << ',' << format_double(h.red_value) << ','
        << format_double(h.primal_residual) << ',' << opt(h.rmse) << ',' << opt(h.msad) << ',' << opt(h.msid) << ','
        << opt(h.psnr) << ',' << format_double(h.reconstruction) << ',' << format_double(h.simplex_drift) << '\n';
  }
  return out.str();
}

}  // namespace aered::admm
