#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stochimc/arch.hpp"
#include "stochimc/bitstream.hpp"
#include "stochimc/image.hpp"
#include "stochimc/netlist.hpp"
#include "stochimc/random.hpp"

namespace stochimc {

enum class AppKind { Lit, Ol, Hdp, Kde };

std::string_view to_string(AppKind kind);
std::optional<AppKind> parse_app_kind(std::string_view text);

// Local image thresholding: T = mean (sigma + 1) / 2 over a sliding window per pixel.
struct LitInput {
  ImageGrid image;
  std::size_t window = 9;
};

// Object location: product of six sensor likelihoods per grid point.
struct OlInput {
  std::size_t width = 64;
  std::size_t height = 64;
  std::vector<std::array<double, 6>> likelihoods;  // row-major grid points
};

// Heart disease prediction from blood pressure, cholesterol, exercise and diet.
struct HdpCase {
  double bp = 0.5;
  double cp = 0.5;
  double e = 0.5;
  double d = 0.5;
  // P(HD | E, D) for (e, d), (e, !d), (!e, d), (!e, !d)
  std::array<double, 4> hd_given{0.5, 0.5, 0.5, 0.5};
};

struct HdpInput {
  std::vector<HdpCase> cases;
};

// Kernel density estimate per pixel: mean over the history of exp(-lambda |X_t - X_{t-i}|).
struct KdeInput {
  std::vector<ImageGrid> history;  // X_{t-1} first
  ImageGrid current;
  double lambda = 4.0;
};

using AppInput = std::variant<LitInput, OlInput, HdpInput, KdeInput>;

AppKind kind_of(const AppInput& input);
void validate(const AppInput& input);
std::size_t instance_count(const AppInput& input);

std::vector<double> golden_eval(const AppInput& input);

// Closed forms used by the golden model, one instance each.
double lit_threshold(std::span<const double> window);
double hdp_probability(const HdpCase& c);
double kde_density(double current, std::span<const double> history, double lambda);

// One netlist per stage; stages run in order with decode-regenerate between them.
struct AppStage {
  std::string name;
  Netlist netlist;
};

struct AppCircuit {
  AppKind kind = AppKind::Ol;
  std::vector<AppStage> stages;
};

AppCircuit build_app_circuit(const AppInput& input);

enum class Engine { Functional, Architecture };

struct EvalOptions {
  Engine engine = Engine::Architecture;
  double flip_rate = 0.0;  // functional engine only
  ExecPolicy policy = ExecPolicy::Parallel;
  bool keep_streams = false;
};

struct AppResult {
  AppKind kind = AppKind::Ol;
  std::vector<double> golden;
  std::vector<double> stochastic;
  double mae_percent = 0.0;
  std::vector<std::string> trace;           // "stage:net" at every arithmetic-op boundary
  std::vector<Bitstream> output_streams;    // final stage output per instance, when kept
  std::vector<ExecutionReport> stage_reports;  // instance 0, architecture engine only
  EnergyBreakdown energy;                   // summed over instances and stages
  std::size_t total_cycles = 0;             // summed over instances and stages
};

// Every arithmetic-op boundary of the circuit, each named once.
std::vector<std::string> node_trace(const AppCircuit& circuit);

AppResult stochastic_eval(const AppInput& input, const ArchConfig& config, const RandomSource& source,
                          const EvalOptions& options = {});

double mean_absolute_error_percent(std::span<const double> golden, std::span<const double> stochastic);

// Inputs from disk: PGM for LIT (one image) and KDE (history frames then current), JSON for OL and HDP.
AppInput load_inputs(const std::filesystem::path& path, AppKind kind);
AppInput parse_probability_json(std::string_view text, AppKind kind);

// Seeded synthetic inputs. `size` is the image/grid side (or case count for HDP); `history`
// applies to KDE.
AppInput synthetic_input(AppKind kind, std::size_t size, std::uint64_t seed, std::size_t history = 8);

}  // namespace stochimc
