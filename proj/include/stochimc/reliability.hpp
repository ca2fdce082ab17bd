#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "stochimc/apps.hpp"
#include "stochimc/arch.hpp"
#include "stochimc/bitstream.hpp"
#include "stochimc/random.hpp"

namespace stochimc {

struct FaultSpec {
  double rate = 0.0;
  std::vector<std::string> targets;
  RandomSource source;
};

// Flips every targeted stream in place; the decision for bit i of node k depends only on
// (source, k, i).
void inject_bitflips(std::map<std::string, Bitstream>& streams, const FaultSpec& spec);

struct SweepPoint {
  AppKind app = AppKind::Ol;
  double rate = 0.0;
  double mean_error = 0.0;  // percent of full scale
  double std_error = 0.0;
  std::size_t trials = 0;
};

struct SweepOptions {
  std::size_t trials = 50;
  ExecPolicy policy = ExecPolicy::Parallel;
};

inline constexpr std::size_t kMinSweepTrials = 30;

std::vector<double> default_flip_rates();

// Mean output error per flip rate. Trial t draws the same streams at every rate, so only the
// injected faults differ between points.
std::vector<SweepPoint> error_sweep(const AppInput& input, std::span<const double> rates, const ArchConfig& config,
                                    const RandomSource& source, const SweepOptions& options = {});

struct LifetimeComparison {
  double parallel_score = 0.0;
  double serial_score = 0.0;
  double ratio = 0.0;  // parallel over serial
  std::size_t parallel_max_writes = 0;
  std::size_t serial_max_writes = 0;
  double max_write_ratio = 0.0;  // serial over parallel
};

// Lifetime over a sequence of stage executions: cells and writes are summed, the max is taken.
Lifetime combined_lifetime(std::span<const ExecutionReport> reports, double e_max);

LifetimeComparison compare_lifetimes(std::span<const ExecutionReport> parallel,
                                     std::span<const ExecutionReport> serial, double e_max);

// Runs the app once per configuration on the architecture engine and compares instance 0.
LifetimeComparison lifetime_compare(const AppInput& input, const ArchConfig& parallel_config,
                                    const ArchConfig& serial_config, const RandomSource& source);

}  // namespace stochimc
