#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpflow/types.hpp"

namespace cpflow::experiments {

using json = nlohmann::json;

struct ConfigError : InvalidArgument {
  explicit ConfigError(std::vector<std::string> problems);
  std::vector<std::string> problems;
};

// CSV sidecar with columns index, value, bound
struct CsvTable {
  std::string name;
  std::vector<std::array<double, 3>> rows;
};

struct Report {
  json document;
  std::vector<CsvTable> curves;
  bool passed = false;
};

const std::vector<std::string>& commands();
json default_config();
// merges onto the defaults and validates; all problems are reported at once
json resolve_config(const json& user);

Report run(const std::string& command, const json& config,
           std::optional<std::uint64_t> seed = std::nullopt, int refine = 0);

std::string csv_text(const CsvTable& table);
// the report without wall-clock fields
json without_timestamps(json report);

}  // namespace cpflow::experiments
