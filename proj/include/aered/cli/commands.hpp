#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aered::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

/// Thread cap from UNMIX_THREADS, if set to a positive integer.
std::optional<int> threads_from_env();

int cmd_synth(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
              const Overrides& overrides, std::ostream& out, std::ostream& err);

int cmd_unmix(const std::filesystem::path& scene_dir, const std::filesystem::path& run_config_path,
              const std::filesystem::path& out_dir, const Overrides& overrides, std::ostream& out,
              std::ostream& err);

int cmd_report(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir,
               std::ostream& out, std::ostream& err);

}  // namespace aered::cli
