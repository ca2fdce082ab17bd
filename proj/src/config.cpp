#include "stochimc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

#include "stochimc/errors.hpp"

namespace stochimc {

namespace {

using nlohmann::json;
using Setter = std::function<void(ArchConfig&, const json&)>;

double as_double(const json& v, std::string_view key) {
  if (!v.is_number()) throw ConfigError("'" + std::string(key) + "' must be a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, std::string_view key) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::size_t>(v.get<long long>());
  throw ConfigError("'" + std::string(key) + "' must be a non-negative integer");
}

bool as_bool(const json& v, std::string_view key) {
  if (!v.is_boolean()) throw ConfigError("'" + std::string(key) + "' must be true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, std::string_view key) {
  if (!v.is_string()) throw ConfigError("'" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const auto table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto count = [&](const char* key, std::size_t ArchConfig::*field) {
      t[key] = [key, field](ArchConfig& c, const json& v) { c.*field = as_count(v, key); };
    };
    auto real = [&](const char* key, double ArchConfig::*field) {
      t[key] = [key, field](ArchConfig& c, const json& v) { c.*field = as_double(v, key); };
    };
    auto flag = [&](const char* key, bool ArchConfig::*field) {
      t[key] = [key, field](ArchConfig& c, const json& v) { c.*field = as_bool(v, key); };
    };
    count("n", &ArchConfig::n);
    count("m", &ArchConfig::m);
    count("bitstream_length", &ArchConfig::bitstream_length);
    count("init_cycles_per_input", &ArchConfig::init_cycles_per_input);
    real("e_preset_aj", &ArchConfig::e_preset_aj);
    real("cycle_time_s", &ArchConfig::cycle_time_s);
    flag("square_layout", &ArchConfig::square_layout);
    flag("toggle_only_writes", &ArchConfig::toggle_only_writes);
    flag("batch_copies", &ArchConfig::batch_copies);
    t["dims.rows"] = [](ArchConfig& c, const json& v) { c.dims.rows = as_count(v, "dims.rows"); };
    t["dims.cols"] = [](ArchConfig& c, const json& v) { c.dims.cols = as_count(v, "dims.cols"); };
    t["resolution"] = [](ArchConfig& c, const json& v) {
      c.resolution = static_cast<unsigned>(as_count(v, "resolution"));
    };
    t["e_sbg_aj"] = [](ArchConfig& c, const json& v) {
      if (v.is_null() || (v.is_string() && v.get<std::string>() == "derive"))
        c.e_sbg_aj.reset();
      else
        c.e_sbg_aj = as_double(v, "e_sbg_aj");
    };
    t["transfer_cycles"] = [](ArchConfig& c, const json& v) {
      if (v.is_null()) c.transfer_cycles.reset();
      else c.transfer_cycles = as_count(v, "transfer_cycles");
    };
    t["q"] = [](ArchConfig& c, const json& v) {
      if (v.is_null()) c.q.reset();
      else c.q = as_count(v, "q");
    };
    t["mode"] = [](ArchConfig& c, const json& v) {
      auto s = as_string(v, "mode");
      if (s == "bit-parallel") c.mode = ExecMode::BitParallel;
      else if (s == "bit-serial") c.mode = ExecMode::BitSerial;
      else throw ConfigError("'mode' must be bit-parallel or bit-serial");
    };
    t["overflow"] = [](ArchConfig& c, const json& v) {
      auto s = as_string(v, "overflow");
      if (s == "pipeline") c.overflow = OverflowPolicy::Pipeline;
      else if (s == "parallel-banks") c.overflow = OverflowPolicy::ParallelBanks;
      else throw ConfigError("'overflow' must be pipeline or parallel-banks");
    };
    auto periph = [&](const char* key, double PeripheralCosts::*field) {
      t[key] = [key, field](ArchConfig& c, const json& v) { c.peripheral.*field = as_double(v, key); };
    };
    periph("peripheral.subarray_driver_aj", &PeripheralCosts::subarray_driver_aj);
    periph("peripheral.btos_read_aj", &PeripheralCosts::btos_read_aj);
    periph("peripheral.local_accumulator_aj", &PeripheralCosts::local_accumulator_aj);
    periph("peripheral.global_accumulator_aj", &PeripheralCosts::global_accumulator_aj);
    for (std::size_t k = 0; k < kGateKindCount; ++k) {
      auto kind = static_cast<GateKind>(k);
      if (!is_primitive(kind)) continue;
      std::string key = "gate_energy_aj." + std::string(to_string(kind));
      t[key] = [key, kind](ArchConfig& c, const json& v) { c.gate_energy_aj[kind] = as_double(v, key); };
    }
    auto mtj = [&](const char* key, double MtjParams::*field) {
      t[key] = [key, field](ArchConfig& c, const json& v) { c.mtj.*field = as_double(v, key); };
    };
    mtj("mtj.r_p", &MtjParams::r_p);
    mtj("mtj.r_ap", &MtjParams::r_ap);
    mtj("mtj.tmr", &MtjParams::tmr);
    mtj("mtj.j_c", &MtjParams::j_c);
    mtj("mtj.i_c", &MtjParams::i_c);
    mtj("mtj.t_switching", &MtjParams::t_switching);
    mtj("mtj.delta", &MtjParams::delta);
    mtj("mtj.v_c0", &MtjParams::v_c0);
    mtj("mtj.tau_0", &MtjParams::tau_0);
    mtj("mtj.e_max", &MtjParams::e_max);
    return t;
  }();
  return table;
}

// A changed delta or tau_0 without an explicit critical voltage re-fits it to the anchor.
void refit_if_needed(ArchConfig& config, bool curve_changed, bool vc_set) {
  if (curve_changed && !vc_set) config.mtj.v_c0 = fit_critical_voltage(MtjAnchor{}, config.mtj.delta, config.mtj.tau_0);
}

void finish(ArchConfig& config) {
  try {
    config.mtj.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("mtj: ") + e.what());
  }
  config.validate();
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

void apply_setting(ArchConfig& config, std::string_view key, const json& value) {
  auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(config, value);
}

void apply_override(ArchConfig& config, std::string_view text) {
  auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("override '" + std::string(text) + "' is not key=value");
  std::string_view key = text.substr(0, eq);
  std::string raw(text.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  bool curve = key == "mtj.delta" || key == "mtj.tau_0";
  apply_setting(config, key, value);
  refit_if_needed(config, curve, key == "mtj.v_c0");
}

ArchConfig config_from_json(const json& flat) {
  if (!flat.is_object()) throw ConfigError("config must be a JSON object of dotted keys");
  ArchConfig config;
  bool curve = false, vc = false;
  for (const auto& [key, value] : flat.items()) {
    apply_setting(config, key, value);
    curve = curve || key == "mtj.delta" || key == "mtj.tau_0";
    vc = vc || key == "mtj.v_c0";
  }
  refit_if_needed(config, curve, vc);
  finish(config);
  return config;
}

json config_to_json(const ArchConfig& c) {
  json j;
  j["n"] = c.n;
  j["m"] = c.m;
  j["dims.rows"] = c.dims.rows;
  j["dims.cols"] = c.dims.cols;
  j["bitstream_length"] = c.bitstream_length;
  j["resolution"] = c.resolution;
  for (const auto& [kind, e] : c.gate_energy_aj) j["gate_energy_aj." + std::string(to_string(kind))] = e;
  j["e_preset_aj"] = c.e_preset_aj;
  j["e_sbg_aj"] = c.e_sbg_aj ? json(*c.e_sbg_aj) : json("derive");
  j["peripheral.subarray_driver_aj"] = c.peripheral.subarray_driver_aj;
  j["peripheral.btos_read_aj"] = c.peripheral.btos_read_aj;
  j["peripheral.local_accumulator_aj"] = c.peripheral.local_accumulator_aj;
  j["peripheral.global_accumulator_aj"] = c.peripheral.global_accumulator_aj;
  j["cycle_time_s"] = c.cycle_time_s;
  j["mode"] = std::string(to_string(c.mode));
  j["overflow"] = std::string(to_string(c.overflow));
  j["square_layout"] = c.square_layout;
  j["toggle_only_writes"] = c.toggle_only_writes;
  j["batch_copies"] = c.batch_copies;
  j["transfer_cycles"] = c.transfer_cycles ? json(*c.transfer_cycles) : json(nullptr);
  j["init_cycles_per_input"] = c.init_cycles_per_input;
  j["q"] = c.q ? json(*c.q) : json(nullptr);
  j["mtj.r_p"] = c.mtj.r_p;
  j["mtj.r_ap"] = c.mtj.r_ap;
  j["mtj.tmr"] = c.mtj.tmr;
  j["mtj.j_c"] = c.mtj.j_c;
  j["mtj.i_c"] = c.mtj.i_c;
  j["mtj.t_switching"] = c.mtj.t_switching;
  j["mtj.delta"] = c.mtj.delta;
  j["mtj.v_c0"] = c.mtj.v_c0;
  j["mtj.tau_0"] = c.mtj.tau_0;
  j["mtj.e_max"] = c.mtj.e_max;
  return j;
}

ArchConfig load_arch_config(const std::optional<std::filesystem::path>& path, std::span<const std::string> overrides) {
  std::optional<std::filesystem::path> file = path;
  if (!file)
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) file = env;
  ArchConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot open config file " + file->string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file " + file->string() + " is not valid JSON");
    config = config_from_json(j);
  }
  for (const auto& o : overrides) apply_override(config, o);
  finish(config);
  return config;
}

}  // namespace stochimc
