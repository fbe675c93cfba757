#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "km/trainer.hpp"
#include "km/types.hpp"

namespace km {

// Trained model plus the raw-id alignment needed to apply it to datasets.
// params.theta is keyed by position in user_ids, params.psi by position in
// item_ids.
struct ModelFile {
  int dim = 0;
  double r_max = 1.0;
  std::vector<int> user_ids;
  std::vector<int> item_ids;
  KmParams params;
};

// Versioned JSON header with base64-packed arrays: theta as little-endian
// doubles (user-major), psi as packed bits (item-major, padded per item).
void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

void save_report(const TrainReport& report, const std::filesystem::path& path);
void save_rmse_csv(const TrainReport& report,
                   const std::filesystem::path& path);

std::string base64_encode(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> base64_decode(const std::string& text);

}  // namespace km
