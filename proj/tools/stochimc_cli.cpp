#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stochimc/apps.hpp"
#include "stochimc/arch.hpp"
#include "stochimc/circuits.hpp"
#include "stochimc/config.hpp"
#include "stochimc/errors.hpp"
#include "stochimc/functional.hpp"
#include "stochimc/netlist.hpp"
#include "stochimc/reliability.hpp"
#include "stochimc/report_io.hpp"
#include "stochimc/scheduler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stochimc;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string out_dir = "runs";
  std::optional<std::size_t> bl;
  std::string mode;
};

ArchConfig resolve_config(const Common& c) {
  std::vector<std::string> overrides = c.overrides;
  if (c.bl) overrides.insert(overrides.begin(), "bitstream_length=" + std::to_string(*c.bl));
  if (!c.mode.empty()) overrides.insert(overrides.begin(), "mode=\"" + c.mode + "\"");
  std::optional<fs::path> path;
  if (!c.config_path.empty()) path = c.config_path;
  return load_arch_config(path, overrides);
}

fs::path make_run_dir(const Common& c) {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  fs::path base = fs::path(c.out_dir) / (std::string(stamp) + "-s" + std::to_string(c.seed));
  fs::path dir = base;
  for (int i = 2; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json run_document(const std::string& command, const std::string& label, const ArchConfig& config,
                  std::uint64_t seed) {
  return {{"command", command}, {"label", label}, {"seed", seed}, {"config", config_to_json(config)},
          {"reports", json::array()}};
}

std::string summary_from_document(const json& doc) {
  std::string csv = report_csv_header();
  for (const auto& entry : doc.at("reports"))
    csv += report_csv_row(entry.at("label").get<std::string>(), entry.at("report"));
  return csv;
}

void finish_run(const fs::path& dir, const json& doc) {
  write_text(dir / "report.json", doc.dump(2) + "\n");
  write_text(dir / "summary.csv", summary_from_document(doc));
  std::cout << dir.string() << '\n';
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError("list", "'" + item + "' is not a number");
    }
  }
  if (out.empty()) throw CLI::ValidationError("list", "empty list");
  return out;
}

AppKind require_app(const std::string& name) {
  auto kind = parse_app_kind(name);
  if (!kind) throw CLI::ValidationError("app", "unknown application '" + name + "' (lit, ol, hdp, kde)");
  return *kind;
}

std::size_t default_size(AppKind kind) {
  switch (kind) {
    case AppKind::Lit: return 16;
    case AppKind::Ol: return 64;
    case AppKind::Hdp: return 256;
    case AppKind::Kde: return 16;
  }
  return 16;
}

struct AppArgs {
  std::string name;
  std::size_t size = 0;
  std::size_t history = 8;
  std::string input;
};

AppInput app_input(const AppArgs& a, std::uint64_t seed) {
  AppKind kind = require_app(a.name);
  if (!a.input.empty()) return load_inputs(a.input, kind);
  return synthetic_input(kind, a.size ? a.size : default_size(kind), seed, a.history);
}

// --- subcommands ---

struct OpArgs {
  std::string kind;
  double a = 0.6;
  double b = 0.3;
  double exp_c = 0.8;
  std::size_t bits = 4;
};

int run_op(const Common& common, const OpArgs& args) {
  ArchConfig config = resolve_config(common);
  RandomSource source(common.seed);
  Netlist netlist;
  StreamMap inputs;
  std::string label = args.kind;
  if (args.kind == "adder") {
    BinaryAdder adder = build_binary_adder(args.bits);
    config.bitstream_length = 1;
    netlist = adder.netlist;
    inputs = adder_inputs(adder, static_cast<std::uint64_t>(args.a), static_cast<std::uint64_t>(args.b));
    label = "adder" + std::to_string(args.bits);
  } else {
    auto op = parse_stochastic_op(args.kind);
    if (!op) throw CLI::ValidationError("op", "unknown operation '" + args.kind + "'");
    netlist = build_stochastic_circuit(*op, args.exp_c);
    inputs = bind_inputs(netlist, op_input_values(*op, args.a, args.b), config.bitstream_length, source);
  }
  PartitionPlan plan = plan_for(netlist, config);
  ExecutionReport report = execute_plan(plan, inputs, config);

  fs::path dir = make_run_dir(common);
  json doc = run_document("op", label, config, common.seed);
  doc["reports"].push_back({{"label", label}, {"report", report_to_json(report)}});
  std::string dump;
  for (const auto& part : plan.parts) dump += dump_schedule(part.netlist, part.schedule);
  write_text(dir / "schedule.txt", dump);
  write_text(dir / "wear.csv", wear_heatmap_csv(report.wear, 0));
  finish_run(dir, doc);
  return 0;
}

int run_app(const Common& common, const AppArgs& args, const std::string& engine) {
  ArchConfig config = resolve_config(common);
  AppInput input = app_input(args, common.seed);
  EvalOptions options;
  if (engine == "functional") options.engine = Engine::Functional;
  else if (engine != "arch") throw CLI::ValidationError("engine", "engine must be arch or functional");
  AppResult result = stochastic_eval(input, config, RandomSource(common.seed), options);

  fs::path dir = make_run_dir(common);
  json doc = run_document("app", std::string(to_string(result.kind)), config, common.seed);
  doc["instances"] = result.golden.size();
  doc["mae_percent"] = result.mae_percent;
  doc["total_cycles"] = result.total_cycles;
  doc["energy_aj"] = {{"logic", result.energy.logic},
                      {"preset", result.energy.preset},
                      {"init", result.energy.init},
                      {"peripheral", result.energy.peripheral},
                      {"total", result.energy.total()}};
  doc["trace"] = result.trace;
  AppCircuit circuit = build_app_circuit(input);
  for (std::size_t s = 0; s < result.stage_reports.size(); ++s)
    doc["reports"].push_back({{"label", std::string(to_string(result.kind)) + ":" + circuit.stages[s].name},
                              {"report", report_to_json(result.stage_reports[s])}});
  write_text(dir / "results.csv", app_result_csv(result));
  finish_run(dir, doc);
  return 0;
}

int run_schedule(const Common& common, const std::string& file) {
  ArchConfig config = resolve_config(common);
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Netlist netlist = parse_netlist(text);
  PartitionPlan plan = plan_for(netlist, config);
  std::string dump, occupancy;
  for (std::size_t i = 0; i < plan.parts.size(); ++i) {
    const auto& part = plan.parts[i];
    std::string head = "# partition " + std::to_string(i) + "\n";
    dump += head + dump_schedule(part.netlist, part.schedule);
    occupancy += head + emit_occupancy_map(part.netlist, part.schedule);
    for (const auto& issue : check_schedule(part.netlist, part.schedule, config.dims))
      std::cerr << "warning: " << issue << '\n';
  }
  fs::path dir = make_run_dir(common);
  write_text(dir / "schedule.txt", dump);
  write_text(dir / "occupancy.txt", occupancy);
  json doc = run_document("schedule", fs::path(file).filename().string(), config, common.seed);
  doc["partitions"] = plan.parts.size();
  doc["q"] = plan.q;
  doc["chunks"] = plan.chunks;
  std::size_t logic = 0, init = 0;
  for (const auto& part : plan.parts) {
    logic += part.schedule.logic_cycles;
    init += part.schedule.init_cycles;
  }
  doc["logic_cycles"] = logic;
  doc["init_cycles"] = init;
  std::cout << dump;
  finish_run(dir, doc);
  return 0;
}

struct SweepArgs {
  std::string axis;
  AppArgs app;
  std::string rates = "0,5,10,15,20";
  std::string values;
  std::size_t trials = 50;
};

int run_sweep(const Common& common, const SweepArgs& args) {
  ArchConfig config = resolve_config(common);
  AppInput input = app_input(args.app, common.seed);
  const std::string series(to_string(kind_of(input)));
  RandomSource source(common.seed);
  std::vector<LongRow> rows;
  fs::path dir;
  json doc = run_document("sweep", args.axis, config, common.seed);

  if (args.axis == "flip-rate") {
    std::vector<double> rates;
    for (double r : parse_list(args.rates)) rates.push_back(r / 100.0);
    SweepOptions options;
    options.trials = args.trials;
    auto points = error_sweep(input, rates, config, source, options);
    for (const auto& p : points) {
      rows.push_back({args.axis, p.rate * 100.0, series, "mean_error", p.mean_error});
      rows.push_back({args.axis, p.rate * 100.0, series, "stderr", p.std_error});
    }
    dir = make_run_dir(common);
    write_text(dir / "sweep.csv", sweep_csv(points));
  } else if (args.axis == "bitstream-length" || args.axis == "subarray-size") {
    bool lengths = args.axis == "bitstream-length";
    auto values = parse_list(args.values.empty() ? (lengths ? "64,256,1024,4096" : "64,128,256") : args.values);
    for (double v : values) {
      if (!(v >= 1.0) || v != std::floor(v)) throw CLI::ValidationError("values", "sweep values must be positive integers");
      ArchConfig point = config;
      if (lengths) {
        point.bitstream_length = static_cast<std::size_t>(v);
      } else {
        point.dims.rows = point.dims.cols = static_cast<std::size_t>(v);
      }
      point.validate();
      AppResult r = stochastic_eval(input, point, source, {});
      rows.push_back({args.axis, v, series, "mae_percent", r.mae_percent});
      rows.push_back({args.axis, v, series, "total_cycles", static_cast<double>(r.total_cycles)});
      rows.push_back({args.axis, v, series, "energy_total_aj", r.energy.total()});
      std::size_t partitions = 0;
      for (const auto& rep : r.stage_reports) partitions += rep.partitions;
      rows.push_back({args.axis, v, series, "partitions", static_cast<double>(partitions)});
    }
    dir = make_run_dir(common);
  } else {
    throw CLI::ValidationError("axis", "axis must be bitstream-length, flip-rate or subarray-size");
  }
  write_text(dir / "long.csv", long_csv(rows));
  finish_run(dir, doc);
  return 0;
}

int run_report(const std::string& run_dir, bool schema) {
  if (schema) {
    std::cout << csv_schema();
    return 0;
  }
  if (run_dir.empty()) throw CLI::ValidationError("run-dir", "a run directory is required");
  std::ifstream in(fs::path(run_dir) / "report.json");
  if (!in) throw std::runtime_error("no report.json in " + run_dir);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError("report.json is not valid JSON", 0);
  std::cout << summary_from_document(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic in-memory computing simulator"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config with dotted keys (else $STOCH_IMC_CONFIG)");
    sub->add_option("--set", common.overrides, "Override key=value (repeatable)");
    sub->add_option("--seed", common.seed, "Random seed")->capture_default_str();
    sub->add_option("--out", common.out_dir, "Parent directory for run directories")->capture_default_str();
    sub->add_option("--bl", common.bl, "Bitstream length");
    sub->add_option("--mode", common.mode, "bit-parallel or bit-serial");
  };

  OpArgs op_args;
  auto* op = app.add_subcommand("op", "Run one stochastic operation (or the binary adder)");
  op->add_option("kind", op_args.kind, "scaled-add, mult, abs-sub, scaled-div, sqrt, exp or adder")->required();
  op->add_option("-a", op_args.a, "First operand")->capture_default_str();
  op->add_option("-b", op_args.b, "Second operand")->capture_default_str();
  op->add_option("--exp-c", op_args.exp_c, "Exponential coefficient")->capture_default_str();
  op->add_option("--bits", op_args.bits, "Adder width")->capture_default_str();
  add_common(op);

  AppArgs app_args;
  std::string engine = "arch";
  auto* app_cmd = app.add_subcommand("app", "Run an application");
  app_cmd->add_option("name", app_args.name, "lit, ol, hdp or kde")->required();
  app_cmd->add_option("--grid,--size", app_args.size, "Image or grid side (case count for hdp)");
  app_cmd->add_option("--history", app_args.history, "KDE history length")->capture_default_str();
  app_cmd->add_option("--input", app_args.input, "PGM (lit, kde) or JSON (ol, hdp) input file");
  app_cmd->add_option("--engine", engine, "arch or functional")->capture_default_str();
  add_common(app_cmd);

  std::string netlist_file;
  auto* sched = app.add_subcommand("schedule", "Schedule a netlist file and dump the mapping");
  sched->add_option("netlist", netlist_file, "Netlist text file")->required();
  add_common(sched);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Sweep one axis for an application");
  sweep->add_option("axis", sweep_args.axis, "bitstream-length, flip-rate or subarray-size")->required();
  sweep->add_option("--app", sweep_args.app.name, "Application")->required();
  sweep->add_option("--grid,--size", sweep_args.app.size, "Image or grid side (case count for hdp)");
  sweep->add_option("--history", sweep_args.app.history, "KDE history length")->capture_default_str();
  sweep->add_option("--input", sweep_args.app.input, "Input file");
  sweep->add_option("--rates", sweep_args.rates, "Flip rates in percent")->capture_default_str();
  sweep->add_option("--values", sweep_args.values, "Axis values");
  sweep->add_option("--trials", sweep_args.trials, "Trials per flip rate")->capture_default_str();
  add_common(sweep);

  std::string run_dir;
  bool schema = false;
  auto* report = app.add_subcommand("report", "Regenerate summary CSV from a run directory");
  report->add_option("run-dir", run_dir, "Run directory");
  report->add_flag("--schema", schema, "Print CSV column documentation");

  try {
    app.parse(argc, argv);
    if (op->parsed()) return run_op(common, op_args);
    if (app_cmd->parsed()) return run_app(common, app_args, engine);
    if (sched->parsed()) return run_schedule(common, netlist_file);
    if (sweep->parsed()) return run_sweep(common, sweep_args);
    if (report->parsed()) return run_report(run_dir, schema);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error[config]: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NetlistError& e) {
    std::cerr << "error[netlist]: " << e.what() << '\n';
    return 1;
  } catch (const CapacityError& e) {
    std::cerr << "error[capacity]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
