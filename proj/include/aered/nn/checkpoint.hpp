#pragma once

#include "aered/nn/network.hpp"

#include <filesystem>

namespace aered::nn {

struct Checkpoint {
  EncoderSpec spec;
  AeParams params;
  long step = 0;
};

/// Directory of fmx files (one per parameter block) plus manifest.json.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace aered::nn
