#include "stochimc/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "stochimc/errors.hpp"
#include "stochimc/functional.hpp"

namespace stochimc {

void inject_bitflips(std::map<std::string, Bitstream>& streams, const FaultSpec& spec) {
  if (!(spec.rate >= 0.0 && spec.rate <= 1.0)) throw DomainError("flip rate must lie in [0,1]");
  for (const auto& node : spec.targets)
    if (!streams.contains(node)) throw DomainError("unknown fault node '" + node + "'");
  for (const auto& node : spec.targets) inject_flips(streams.at(node), spec.rate, fault_source_for(spec.source, node));
}

std::vector<double> default_flip_rates() { return {0.0, 0.05, 0.10, 0.15, 0.20}; }

std::vector<SweepPoint> error_sweep(const AppInput& input, std::span<const double> rates, const ArchConfig& config,
                                    const RandomSource& source, const SweepOptions& options) {
  if (options.trials < kMinSweepTrials)
    throw DomainError("a sweep needs at least " + std::to_string(kMinSweepTrials) + " trials");
  for (double r : rates)
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("flip rate must lie in [0,1]");
  const AppKind app = kind_of(input);
  const std::size_t trials = options.trials;
  std::vector<double> errors(rates.size() * trials);
  std::exception_ptr failure;
  const bool parallel = options.policy == ExecPolicy::Parallel;

#pragma omp parallel for schedule(dynamic) collapse(2) if (parallel)
  for (std::size_t r = 0; r < rates.size(); ++r)
    for (std::size_t t = 0; t < trials; ++t) {
      try {
        EvalOptions eval;
        eval.engine = Engine::Functional;
        eval.flip_rate = rates[r];
        eval.policy = ExecPolicy::Serial;
        auto result = stochastic_eval(input, config, source.child("trial").child(t), eval);
        errors[r * trials + t] = result.mae_percent;
      } catch (...) {
#pragma omp critical(stochimc_sweep_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  if (failure) std::rethrow_exception(failure);

  std::vector<SweepPoint> points;
  for (std::size_t r = 0; r < rates.size(); ++r) {
    std::span<const double> e(errors.data() + r * trials, trials);
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(trials);
    double var = 0.0;
    for (double v : e) var += (v - mean) * (v - mean);
    var /= static_cast<double>(trials - 1);
    points.push_back({app, rates[r], mean, std::sqrt(var / static_cast<double>(trials)), trials});
  }
  return points;
}

Lifetime combined_lifetime(std::span<const ExecutionReport> reports, double e_max) {
  std::size_t cells = 0, writes = 0, max_writes = 0;
  for (const auto& r : reports) {
    cells += r.utilized_cells;
    writes += r.total_writes;
    max_writes = std::max(max_writes, r.max_cell_writes);
  }
  if (writes == 0) throw DomainError("lifetime undefined for a run without writes");
  return {e_max * static_cast<double>(cells) / static_cast<double>(writes), max_writes};
}

LifetimeComparison compare_lifetimes(std::span<const ExecutionReport> parallel,
                                     std::span<const ExecutionReport> serial, double e_max) {
  Lifetime p = combined_lifetime(parallel, e_max);
  Lifetime s = combined_lifetime(serial, e_max);
  LifetimeComparison c;
  c.parallel_score = p.score;
  c.serial_score = s.score;
  c.ratio = p.score / s.score;
  c.parallel_max_writes = p.max_cell_writes;
  c.serial_max_writes = s.max_cell_writes;
  c.max_write_ratio = static_cast<double>(s.max_cell_writes) / static_cast<double>(p.max_cell_writes);
  return c;
}

LifetimeComparison lifetime_compare(const AppInput& input, const ArchConfig& parallel_config,
                                    const ArchConfig& serial_config, const RandomSource& source) {
  EvalOptions eval;
  eval.engine = Engine::Architecture;
  auto par = stochastic_eval(input, parallel_config, source, eval);
  auto ser = stochastic_eval(input, serial_config, source, eval);
  return compare_lifetimes(par.stage_reports, ser.stage_reports, parallel_config.mtj.e_max);
}

}  // namespace stochimc
