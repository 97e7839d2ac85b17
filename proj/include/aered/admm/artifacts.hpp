#pragma once

#include "aered/admm/admm.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace aered::admm {

nlohmann::json to_json(const AdmmConfig& config);
/// Reads the flat keys written by to_json. Missing keys keep their defaults.
AdmmConfig admm_config_from_json(const nlohmann::json& j, AdmmConfig base = {});

/// k,ae_loss,red_value,primal_residual,rmse,msad,msid,psnr,reconstruction,simplex_drift
std::string history_csv(const std::vector<HistoryEntry>& history);

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

}  // namespace aered::admm
