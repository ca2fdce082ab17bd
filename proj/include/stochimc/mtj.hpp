#pragma once

#include <span>
#include <vector>

namespace stochimc {

// Device constants of the storage MTJ. Times in seconds, voltages in volts.
struct MtjParams {
  double r_p = 12.7e3;
  double r_ap = 76.3e3;
  double tmr = 5.0;
  double j_c = 1e6;        // A/cm^2
  double i_c = 0.79e-6;    // A
  double t_switching = 1e-9;
  double delta = 60.0;
  double v_c0 = 0.0;       // filled by calibrated_mtj_params()
  double tau_0 = 1e-9;
  double e_max = 1e15;

  void validate() const;
};

struct PulseSpec {
  double v_p = 0.0;
  double t_p = 0.0;

  bool operator==(const PulseSpec&) const = default;
};

// Search limits for pulse selection.
struct PulseLimits {
  double v_min = 0.05;
  double v_max = 0.6;
  double t_min = 3e-9;
  double t_max = 10e-9;
};

// Calibration anchor: a pulse known to switch with a given probability.
struct MtjAnchor {
  double v_p = 0.310;
  double t_p = 4e-9;
  double probability = 0.7;
};

// Critical voltage that puts the switching curve through the anchor for the given delta and tau_0.
double fit_critical_voltage(const MtjAnchor& anchor, double delta, double tau_0);

// Defaults with v_c0 fitted to the standard anchor.
MtjParams calibrated_mtj_params();

double switching_probability(const MtjParams& params, const PulseSpec& pulse);

PulseSpec pulse_for_probability(const MtjParams& params, double p_target, double t_p,
                                const PulseLimits& limits = {});

double switch_energy(const PulseSpec& pulse, double r_mtj);

PulseSpec min_energy_pulse(const MtjParams& params, double p_target, std::span<const double> t_p_grid,
                           const PulseLimits& limits = {});

// Durations 3, 4, ..., 10 ns.
std::vector<double> default_duration_grid();

}  // namespace stochimc
