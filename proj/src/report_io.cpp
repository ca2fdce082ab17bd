#include "stochimc/report_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

namespace stochimc {

using nlohmann::json;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return ec == std::errc() ? std::string(buf.data(), ptr) : std::string("nan");
}

json report_to_json(const ExecutionReport& r) {
  json j;
  j["mode"] = std::string(to_string(r.mode));
  j["bitstream_length"] = r.bitstream_length;
  j["n"] = r.n;
  j["m"] = r.m;
  j["q"] = r.q;
  j["chunks"] = r.chunks;
  j["partitions"] = r.partitions;
  j["passes"] = r.passes;
  j["required_banks"] = r.required_banks;
  j["cycles"] = {{"logic", r.logic_cycles},         {"init", r.init_cycles},
                 {"preset", r.preset_cycles},       {"transfer", r.transfer_cycles},
                 {"accumulation", r.accumulation_steps}, {"total", r.total_cycles}};
  json census = {{"preset", r.census.preset}, {"sbg", r.census.sbg}};
  for (std::size_t k = 0; k < kGateKindCount; ++k)
    if (r.census.logic[k] > 0) census["logic"][std::string(to_string(static_cast<GateKind>(k)))] = r.census.logic[k];
  j["writes"] = census;
  j["energy_aj"] = {{"logic", r.energy.logic},
                    {"preset", r.energy.preset},
                    {"init", r.energy.init},
                    {"peripheral", r.energy.peripheral},
                    {"total", r.energy.total()}};
  j["wear"] = {{"utilized_cells", r.utilized_cells}, {"total_writes", r.total_writes},
               {"max_cell_writes", r.max_cell_writes}};
  json outs = json::object();
  for (const auto& [name, bs] : r.outputs)
    outs[name] = {{"ones", bs.ones()}, {"value", decode_unipolar(bs)}};
  j["outputs"] = outs;
  return j;
}

std::string report_csv_header() {
  return "label,mode,bitstream_length,passes,total_cycles,logic_cycles,init_cycles,energy_logic_aj,"
         "energy_preset_aj,energy_init_aj,energy_peripheral_aj,energy_total_aj,utilized_cells,total_writes,"
         "max_cell_writes\n";
}

std::string report_csv_row(const std::string& label, const json& r) {
  std::ostringstream out;
  const auto& e = r.at("energy_aj");
  const auto& c = r.at("cycles");
  const auto& w = r.at("wear");
  out << label << ',' << r.at("mode").get<std::string>() << ',' << r.at("bitstream_length").get<std::size_t>() << ','
      << r.at("passes").get<std::size_t>() << ',' << c.at("total").get<std::size_t>() << ','
      << c.at("logic").get<std::size_t>() << ',' << c.at("init").get<std::size_t>() << ','
      << format_number(e.at("logic").get<double>()) << ',' << format_number(e.at("preset").get<double>()) << ','
      << format_number(e.at("init").get<double>()) << ',' << format_number(e.at("peripheral").get<double>()) << ','
      << format_number(e.at("total").get<double>()) << ',' << w.at("utilized_cells").get<std::size_t>() << ','
      << w.at("total_writes").get<std::size_t>() << ',' << w.at("max_cell_writes").get<std::size_t>() << '\n';
  return out.str();
}

std::string wear_heatmap_csv(const WearMap& wear, std::size_t subarray) {
  std::ostringstream out;
  for (std::size_t r = 0; r < wear.rows(); ++r) {
    for (std::size_t c = 0; c < wear.cols(); ++c) out << (c ? "," : "") << wear.at(subarray, r, c);
    out << '\n';
  }
  return out.str();
}

std::string app_result_csv(const AppResult& result) {
  std::ostringstream out;
  out << "input_id,golden,stochastic,abs_error\n";
  for (std::size_t i = 0; i < result.golden.size(); ++i)
    out << i << ',' << format_number(result.golden[i]) << ',' << format_number(result.stochastic[i]) << ','
        << format_number(std::abs(result.golden[i] - result.stochastic[i])) << '\n';
  return out.str();
}

std::string sweep_csv(std::span<const SweepPoint> points) {
  std::ostringstream out;
  out << "app,rate,mean_error,stderr,trials\n";
  for (const auto& p : points)
    out << to_string(p.app) << ',' << format_number(p.rate) << ',' << format_number(p.mean_error) << ','
        << format_number(p.std_error) << ',' << p.trials << '\n';
  return out.str();
}

std::string long_csv(std::span<const LongRow> rows) {
  std::ostringstream out;
  out << "axis,x,series,metric,value\n";
  for (const auto& r : rows)
    out << r.axis << ',' << format_number(r.x) << ',' << r.series << ',' << r.metric << ',' << format_number(r.value)
        << '\n';
  return out.str();
}

std::string csv_schema() {
  return R"(summary.csv (op, app, schedule, report)
  label                 run label (operation or application name, stage suffix)
  mode                  bit-parallel | bit-serial
  bitstream_length      stream length in bits
  passes                pipeline passes over the bank
  total_cycles          init + logic + preset per pass, plus transfer and accumulation
  logic_cycles          gate evaluation cycles
  init_cycles           stochastic input initialization cycles
  energy_logic_aj       gate output writes
  energy_preset_aj      output cell presets
  energy_init_aj        stochastic bit generation
  energy_peripheral_aj  drivers, BtoS lookups and accumulators
  energy_total_aj       sum of the four categories
  utilized_cells        cells written at least once
  total_writes          write accesses over all cells
  max_cell_writes       largest write count of any single cell

results.csv (app)
  input_id              pixel, grid point or case index (row-major)
  golden                double-precision reference
  stochastic            decoded stochastic output
  abs_error             |golden - stochastic|

sweep.csv (sweep flip-rate)
  app                   application
  rate                  injected bit flip probability
  mean_error            mean absolute output error, percent of full scale
  stderr                standard error of mean_error over trials
  trials                Monte-Carlo trials

long.csv (sweep, any axis)
  axis                  bitstream-length | flip-rate | subarray-size
  x                     axis value
  series                application or operation
  metric                quantity name (mae_percent, total_cycles, energy_total_aj, ...)
  value                 quantity value

wear.csv (op)
  rows x cols matrix of write counts of subarray 0
)";
}

}  // namespace stochimc
