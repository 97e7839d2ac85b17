#include "aered/cli/commands.hpp"

#include "aered/admm/artifacts.hpp"
#include "aered/baselines/baselines.hpp"
#include "aered/cli/png.hpp"
#include "aered/core/error.hpp"
#include "aered/core/fmx.hpp"
#include "aered/core/metrics.hpp"
#include "aered/nn/checkpoint.hpp"
#include "aered/synth/scene.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace aered::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(what, "invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

json number_or_null(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::string fixed(double v, int digits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string library_versions() {
  return "eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION) + ", nlohmann_json " + std::to_string(NLOHMANN_JSON_VERSION_MAJOR) +
         "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
}

enum class Method { ae_red, plain_ae, fcls };

Method parse_method(const json& j) {
  if (!j.contains("method")) throw ConfigError("method", "missing required field \"method\"");
  const auto m = j.at("method").get<std::string>();
  if (m == "ae-red") return Method::ae_red;
  if (m == "plain-ae") return Method::plain_ae;
  if (m == "fcls") return Method::fcls;
  throw ConfigError("method", "expected ae-red, plain-ae or fcls, got '" + m + "'");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::ae_red:
      return "ae-red";
    case Method::plain_ae:
      return "plain-ae";
    case Method::fcls:
      return "fcls";
  }
  return "?";
}

std::optional<double> scene_snr(const synth::LoadedScene& scene) {
  if (!scene.metadata.contains("config")) return std::nullopt;
  const auto& c = scene.metadata["config"];
  if (!c.contains("snr_db") || !c["snr_db"].is_number()) return std::nullopt;
  return c["snr_db"].get<double>();
}

}  // namespace

std::optional<int> threads_from_env() {
  const char* v = std::getenv("UNMIX_THREADS");
  if (v == nullptr) return std::nullopt;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1) return std::nullopt;
  return static_cast<int>(n);
}

int cmd_synth(const fs::path& config_path, const fs::path& out_dir, const Overrides& overrides, std::ostream& out,
              std::ostream& err) {
  try {
    const json j = read_json_file(config_path, "config");
    synth::SceneConfig config = synth::scene_config_from_json(j);
    if (overrides.seed) config.seed = *overrides.seed;
    const synth::SyntheticScene scene = synth::make_scene(config);
    synth::write_scene(scene, out_dir);
    out << "realized SNR: " << (std::isinf(scene.realized_snr_db) ? "inf" : fixed(scene.realized_snr_db, 4))
        << " dB (target " << (std::isinf(config.snr_db) ? "inf" : fixed(config.snr_db, 4)) << " dB)\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "synth: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "synth: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_unmix(const fs::path& scene_dir, const fs::path& run_config_path, const fs::path& out_dir,
              const Overrides& overrides, std::ostream& out, std::ostream& err) {
  Method method{};
  admm::AdmmConfig config;
  baselines::FclsOptions fcls_options;
  synth::LoadedScene scene;
  try {
    scene = synth::read_scene(scene_dir);
    const json j = read_json_file(run_config_path, "run_config");
    method = parse_method(j);

    if (scene.abundances) config.endmembers = scene.abundances->endmembers();
    if (const auto snr = scene_snr(scene)) config.lambda = config.mu = admm::AdmmConfig::penalty_for_snr(*snr);
    config = admm::admm_config_from_json(j, config);
    if (!j.contains("R") && !scene.abundances) throw ConfigError("R", "missing required field \"R\"");
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.threads) {
      config.threads = *overrides.threads;
    } else if (const auto t = threads_from_env()) {
      config.threads = *t;
    }
    if (j.contains("fcls_iterations")) fcls_options.iterations = j.at("fcls_iterations").get<long>();
    if (method == Method::fcls) {
      if (!scene.endmembers) throw ConfigError("method", "fcls needs known endmembers (S_true.fmx)");
      if (fcls_options.iterations < 1) throw ConfigError("fcls_iterations", "must be >= 1");
    } else {
      config.validate();
    }
  } catch (const ConfigError& e) {
    err << "unmix: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "unmix: config field has wrong type: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "unmix: " << e.what() << '\n';
    return kExitRuntime;
  }

  try {
    fs::create_directories(out_dir);
    const admm::GroundTruth truth{scene.abundances ? &*scene.abundances : nullptr,
                                  scene.endmembers ? &*scene.endmembers : nullptr,
                                  scene.clean ? &*scene.clean : nullptr};

    AbundanceMatrix A_hat;
    EndmemberMatrix S_hat;
    std::vector<admm::HistoryEntry> history;
    json resolved;
    if (method == Method::fcls) {
      const auto result = baselines::fcls(scene.noisy, *scene.endmembers, fcls_options);
      A_hat = result.abundances;
      S_hat = *scene.endmembers;
      resolved = {{"fcls_iterations", fcls_options.iterations},
                  {"power_iterations", fcls_options.power_iterations},
                  {"step", result.step}};
      std::string losses = "iteration,loss\n";
      for (std::size_t i = 0; i < result.losses.size(); ++i) {
        losses += std::to_string(i + 1) + "," + admm::format_double(result.losses[i]) + "\n";
      }
      write_text(out_dir / "fcls_loss.csv", losses);
    } else {
      const admm::AdmmConfig effective = method == Method::plain_ae ? baselines::plain_ae_config(config) : config;
      try {
        auto result = admm::run_ae_red(scene.noisy, effective, nullptr, truth);
        A_hat = result.abundances;
        S_hat = result.endmembers;
        history = result.state.history;
        fmx::write(out_dir / "A_aux.fmx", result.state.A);
        nn::save_checkpoint(out_dir / "checkpoints" / "final",
                            {result.spec, result.state.params, result.state.adam.step});
      } catch (const admm::AdmmFailure& e) {
        write_text(out_dir / "history.csv", admm::history_csv(e.history()));
        throw;
      }
      resolved = admm::to_json(effective);
      resolved.erase("overlap_denoiser");
      if (method == Method::plain_ae) resolved["requested"] = admm::to_json(config);
    }

    const Matrix& reference = scene.clean ? *scene.clean : scene.noisy.data();
    const bool have_truth = scene.abundances.has_value() || scene.endmembers.has_value();
    const auto metrics =
        evaluate_unmixing(reference, A_hat, S_hat, scene.abundances ? &*scene.abundances : nullptr,
                          scene.endmembers ? &*scene.endmembers : nullptr);

    fmx::write(out_dir / "A_hat.fmx", A_hat.data());
    fmx::write(out_dir / "S_hat.fmx", S_hat.data());
    write_text(out_dir / "history.csv", admm::history_csv(history));

    json cfg;
    cfg["method"] = method_name(method);
    cfg["config"] = resolved;
    cfg["seed"] = config.seed;
    cfg["scene"] = scene.metadata;
    cfg["library_versions"] = library_versions();
    write_text(out_dir / "config.json", cfg.dump(2) + "\n");

    json m;
    m["method"] = method_name(method);
    m["height"] = scene.noisy.height();
    m["width"] = scene.noisy.width();
    m["endmembers"] = A_hat.endmembers();
    m["rmse"] = number_or_null(metrics.rmse);
    m["msad"] = number_or_null(metrics.msad);
    m["msid"] = number_or_null(metrics.msid);
    m["psnr"] = number_or_null(metrics.psnr);
    m["psnr_reference"] = scene.clean ? "Y_clean" : "Y_noisy";
    m["alignment"] = "estimated endmembers matched to truth by minimum total SAD; abundance rows reordered before RMSE";
    m["permutation"] = metrics.permutation;
    m["msid_log"] = "natural";
    m["msad_units"] = "radians";
    write_text(out_dir / "metrics.json", m.dump(2) + "\n");

    out << "method=" << method_name(method);
    if (have_truth) {
      out << " RMSE=" << (metrics.rmse ? fixed(*metrics.rmse, 6) : "n/a")
          << " mSAD=" << (metrics.msad ? fixed(*metrics.msad, 6) : "n/a")
          << " mSID=" << (metrics.msid ? fixed(*metrics.msid, 6) : "n/a");
    }
    out << " PSNR=" << fixed(metrics.psnr, 4) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "unmix: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir, std::ostream& out,
               std::ostream& err) {
  if (run_dirs.empty()) {
    err << "report: need at least one run directory\n";
    return kExitConfig;
  }
  struct Row {
    std::string name, method;
    json metrics;
  };
  std::vector<Row> rows;
  std::vector<std::string> failed;
  try {
    fs::create_directories(out_dir / "maps");
  } catch (const std::exception& e) {
    err << "report: " << e.what() << '\n';
    return kExitRuntime;
  }

  for (const auto& dir : run_dirs) {
    try {
      std::ifstream in(dir / "metrics.json");
      if (!in) throw Error("missing metrics.json");
      const json m = json::parse(in);
      const Matrix A = fmx::read(dir / "A_hat.fmx");
      const Grid grid{m.at("height").get<Index>(), m.at("width").get<Index>()};
      if (A.cols() != grid.pixels()) throw DimensionError("A_hat.fmx does not match the recorded grid");
      std::string name = dir.filename().string();
      if (name.empty()) name = dir.parent_path().filename().string();
      for (Index r = 0; r < A.rows(); ++r) {
        write_png_gray8(out_dir / "maps" / (name + "_abundance_" + std::to_string(r) + ".png"), grid.height,
                        grid.width, abundance_map_pixels(A, r, grid));
      }
      rows.push_back({name, m.value("method", std::string("?")), m});
    } catch (const std::exception& e) {
      failed.push_back(dir.string());
      err << "report: skipping " << dir.string() << ": " << e.what() << '\n';
    }
  }

  auto cell = [](const json& m, const char* key, int digits) -> std::string {
    if (!m.contains(key) || !m[key].is_number()) return "n/a";
    return fixed(m[key].get<double>(), digits);
  };

  std::ostringstream csv;
  csv << "run,method,rmse,msad,msid,psnr\n";
  out << std::left << std::setw(24) << "run" << std::setw(10) << "method" << std::right << std::setw(12) << "RMSE"
      << std::setw(12) << "mSAD" << std::setw(12) << "mSID" << std::setw(12) << "PSNR" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(24) << r.name << std::setw(10) << r.method << std::right << std::setw(12)
        << cell(r.metrics, "rmse", 6) << std::setw(12) << cell(r.metrics, "msad", 6) << std::setw(12)
        << cell(r.metrics, "msid", 6) << std::setw(12) << cell(r.metrics, "psnr", 4) << '\n';
    auto raw = [&](const char* key) {
      return r.metrics.contains(key) && r.metrics[key].is_number() ? admm::format_double(r.metrics[key].get<double>())
                                                                    : std::string();
    };
    csv << r.name << ',' << r.method << ',' << raw("rmse") << ',' << raw("msad") << ',' << raw("msid") << ','
        << raw("psnr") << '\n';
  }
  try {
    write_text(out_dir / "report.csv", csv.str());
  } catch (const std::exception& e) {
    err << "report: " << e.what() << '\n';
    return kExitRuntime;
  }
  if (!failed.empty()) {
    err << "report: " << failed.size() << " of " << run_dirs.size() << " run directories could not be read\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace aered::cli
