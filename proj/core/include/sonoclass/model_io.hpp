#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonoclass/config.hpp"
#include "sonoclass/svm.hpp"
#include "sonoclass/wavelet_baseline.hpp"

namespace sonoclass {

struct TrainedModel {
  RunConfig config;                      // runtime fields (cache_dir, threads) are not stored
  std::vector<std::string> class_names;  // OvoModel class values index this list
  std::size_t feature_dim = 0;           // raw extracted dimension before selection
  OvoModel ovo;
  std::optional<PatchSet> patches;
};

// Plain-text model file. Doubles are written with 17 significant digits so
// a save/load round trip is exact and retraining writes identical bytes.
std::string serialize_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace sonoclass
