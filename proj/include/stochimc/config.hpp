#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stochimc/arch.hpp"

namespace stochimc {

inline constexpr const char* kConfigEnvVar = "STOCH_IMC_CONFIG";

// Flat dotted keys mirroring the ArchConfig and MtjParams field names, e.g. "dims.rows",
// "gate_energy_aj.NAND", "peripheral.btos_read_aj", "mtj.delta".
std::vector<std::string> config_keys();

// Throws ConfigError for unknown keys, wrong value types and out-of-range values.
void apply_setting(ArchConfig& config, std::string_view key, const nlohmann::json& value);

// `text` is "key=value"; the value is read as JSON when it parses, otherwise as a string.
void apply_override(ArchConfig& config, std::string_view text);

ArchConfig config_from_json(const nlohmann::json& flat);
nlohmann::json config_to_json(const ArchConfig& config);

// Reads `path`, or the file named by STOCH_IMC_CONFIG when `path` is empty, then applies the
// overrides in order. With neither file, starts from defaults.
ArchConfig load_arch_config(const std::optional<std::filesystem::path>& path, std::span<const std::string> overrides);

}  // namespace stochimc
