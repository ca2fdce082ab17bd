#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stochimc/apps.hpp"
#include "stochimc/arch.hpp"
#include "stochimc/reliability.hpp"

namespace stochimc {

// Shortest round-trip decimal form.
std::string format_number(double value);

nlohmann::json report_to_json(const ExecutionReport& report);

// Summary CSV rows are derived from the JSON form, so a stored report regenerates them exactly.
std::string report_csv_header();
std::string report_csv_row(const std::string& label, const nlohmann::json& report);

// One subarray of the wear map as a rows x cols matrix.
std::string wear_heatmap_csv(const WearMap& wear, std::size_t subarray);

// Columns: input_id, golden, stochastic, abs_error.
std::string app_result_csv(const AppResult& result);

// Columns: app, rate, mean_error, stderr, trials.
std::string sweep_csv(std::span<const SweepPoint> points);

// Plot-ready long format: axis, x, series, metric, value.
struct LongRow {
  std::string axis;
  double x = 0.0;
  std::string series;
  std::string metric;
  double value = 0.0;
};
std::string long_csv(std::span<const LongRow> rows);

// Column documentation for every CSV the tool writes.
std::string csv_schema();

}  // namespace stochimc
