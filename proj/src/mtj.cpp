#include "stochimc/mtj.hpp"

#include <cmath>
#include <string>

#include "stochimc/errors.hpp"

namespace stochimc {

void MtjParams::validate() const {
  if (!(r_p > 0.0) || !(r_ap > r_p)) throw DomainError("MTJ resistances must satisfy r_ap > r_p > 0");
  double derived = (r_ap - r_p) / r_p;
  if (std::abs(derived - tmr) > 0.01 * std::abs(tmr))
    throw DomainError("tmr field " + std::to_string(tmr) + " disagrees with resistances (" +
                      std::to_string(derived) + ")");
  if (!(delta > 0.0) || !(v_c0 > 0.0) || !(tau_0 > 0.0)) throw DomainError("delta, v_c0 and tau_0 must be positive");
  if (!(e_max >= 1.0)) throw DomainError("e_max must be at least 1");
}

double fit_critical_voltage(const MtjAnchor& anchor, double delta, double tau_0) {
  if (!(anchor.probability > 0.0 && anchor.probability < 1.0)) throw DomainError("anchor probability must be in (0,1)");
  // P = 1 - exp(-t/tau)  =>  tau = -t / log(1 - P)
  double tau = -anchor.t_p / std::log1p(-anchor.probability);
  double reduced = 1.0 - std::log(tau / tau_0) / delta;
  if (!(reduced > 0.0)) throw DomainError("anchor not reachable with the given delta and tau_0");
  return anchor.v_p / reduced;
}

MtjParams calibrated_mtj_params() {
  MtjParams params;
  params.v_c0 = fit_critical_voltage(MtjAnchor{}, params.delta, params.tau_0);
  return params;
}

double switching_probability(const MtjParams& params, const PulseSpec& pulse) {
  if (!(pulse.v_p > 0.0) || !(pulse.t_p > 0.0)) throw DomainError("pulse amplitude and duration must be positive");
  double tau = params.tau_0 * std::exp(params.delta * (1.0 - pulse.v_p / params.v_c0));
  return -std::expm1(-pulse.t_p / tau);
}

PulseSpec pulse_for_probability(const MtjParams& params, double p_target, double t_p, const PulseLimits& limits) {
  if (!(p_target > 0.0 && p_target < 1.0)) throw DomainError("target probability must be in (0,1)");
  if (!(t_p >= limits.t_min * (1 - 1e-12) && t_p <= limits.t_max * (1 + 1e-12)))
    throw DomainError("pulse duration outside the configured range");
  double lo = limits.v_min;
  double hi = limits.v_max;
  if (switching_probability(params, {lo, t_p}) > p_target || switching_probability(params, {hi, t_p}) < p_target)
    throw RangeError("probability " + std::to_string(p_target) + " not attainable within the voltage range");
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    double mid = 0.5 * (lo + hi);
    double p = switching_probability(params, {mid, t_p});
    if (std::abs(p - p_target) < 1e-12) return {mid, t_p};
    (p < p_target ? lo : hi) = mid;
  }
  PulseSpec result{0.5 * (lo + hi), t_p};
  if (std::abs(switching_probability(params, result) - p_target) > 1e-6)
    throw RangeError("bisection did not reach 1e-6 of the target probability");
  return result;
}

double switch_energy(const PulseSpec& pulse, double r_mtj) {
  if (!(r_mtj > 0.0)) throw DomainError("resistance must be positive");
  return pulse.v_p * pulse.v_p * pulse.t_p / r_mtj;
}

PulseSpec min_energy_pulse(const MtjParams& params, double p_target, std::span<const double> t_p_grid,
                           const PulseLimits& limits) {
  if (t_p_grid.empty()) throw DomainError("duration grid is empty");
  bool found = false;
  PulseSpec best;
  double best_energy = 0.0;
  for (double t : t_p_grid) {
    PulseSpec candidate;
    try {
      candidate = pulse_for_probability(params, p_target, t, limits);
    } catch (const RangeError&) {
      continue;
    }
    double energy = switch_energy(candidate, params.r_p);
    if (!found || energy < best_energy || (energy == best_energy && t < best.t_p)) {
      best = candidate;
      best_energy = energy;
      found = true;
    }
  }
  if (!found) throw RangeError("no grid duration attains probability " + std::to_string(p_target));
  return best;
}

std::vector<double> default_duration_grid() {
  std::vector<double> grid;
  for (int ns = 3; ns <= 10; ++ns) grid.push_back(ns * 1e-9);
  return grid;
}

}  // namespace stochimc
