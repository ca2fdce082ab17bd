// Acceptance harness: one PASS/FAIL line per criterion. Tolerances are pinned below.
//
// Exit status is non-zero when any criterion fails, unless its number is passed with
// --known-failure N; the FAIL line is printed either way.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stochimc/apps.hpp"
#include "stochimc/arch.hpp"
#include "stochimc/circuits.hpp"
#include "stochimc/functional.hpp"
#include "stochimc/mtj.hpp"
#include "stochimc/reliability.hpp"
#include "stochimc/scheduler.hpp"

using namespace stochimc;

namespace {

namespace tol {
constexpr double kAnchorProbability = 0.70;
constexpr double kAnchorSlack = 0.02;
constexpr double kAnchorRuntimeS = 1.0;
constexpr double kCycleRuntimeS = 1.0;
constexpr std::size_t kOracleLength = 4096;
constexpr std::size_t kOracleTrials = 200;
constexpr double kSigmas = 3.0;
constexpr double kDivisionSlack = 0.05;
constexpr double kExpSlack = 0.03;
constexpr double kSqrtBound = 0.1;
constexpr double kOracleRuntimeS = 120.0;
constexpr double kEquivalenceRuntimeS = 300.0;
constexpr double kFlipErrorBound = 6.5;
constexpr double kZeroFaultBound = 5.0;
constexpr std::size_t kSweepTrials = 50;
constexpr double kSweepRuntimeS = 600.0;
constexpr double kMaxWriteRatio = 100.0;
constexpr double kLifetimeRatio = 10.0;
}  // namespace tol

constexpr std::size_t kAppLength = 256;
constexpr std::array<std::uint64_t, 3> kSeeds{11, 22, 33};

const std::array kOps{StochasticOp::ScaledAdd, StochasticOp::Mult, StochasticOp::AbsSub,
                      StochasticOp::ScaledDiv, StochasticOp::Sqrt, StochasticOp::Exp};
const std::array kApps{AppKind::Lit, AppKind::Ol, AppKind::Hdp, AppKind::Kde};

// Reduced inputs: 16x16 LIT image, 16x16 OL grid, 64 HDP cases, 16x16 KDE frames with 8 history frames.
AppInput reduced_input(AppKind kind, std::uint64_t seed) {
  return synthetic_input(kind, kind == AppKind::Hdp ? 64 : 16, seed, 8);
}

class Verdict {
 public:
  template <typename... Args>
  void require(bool ok, Args&&... why) {
    if (ok) return;
    passed_ = false;
    std::ostringstream os;
    (os << ... << why);
    if (!notes_.empty()) notes_ += "; ";
    notes_ += os.str();
  }
  template <typename... Args>
  void note(Args&&... what) {
    std::ostringstream os;
    (os << ... << what);
    if (!notes_.empty()) notes_ += "; ";
    notes_ += os.str();
  }
  bool passed() const { return passed_; }
  const std::string& notes() const { return notes_; }

 private:
  bool passed_ = true;
  std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Verdict device_anchor() {
  Verdict v;
  auto start = std::chrono::steady_clock::now();
  MtjParams mtj = calibrated_mtj_params();
  double p = switching_probability(mtj, {0.310, 4e-9});
  v.require(std::abs(p - tol::kAnchorProbability) <= tol::kAnchorSlack, "anchor P=", p);

  std::vector<double> voltages(100);
  for (std::size_t i = 0; i < voltages.size(); ++i) voltages[i] = 0.25 + 0.07 * static_cast<double>(i) / 99.0;
  auto durations = default_duration_grid();
  v.require(durations.size() == 8, "duration grid size ", durations.size());
  std::size_t violations = 0;
  for (std::size_t i = 0; i < voltages.size(); ++i)
    for (std::size_t j = 0; j < durations.size(); ++j) {
      double here = switching_probability(mtj, {voltages[i], durations[j]});
      if (i > 0 && !(here > switching_probability(mtj, {voltages[i - 1], durations[j]}))) ++violations;
      if (j > 0 && !(here > switching_probability(mtj, {voltages[i], durations[j - 1]}))) ++violations;
    }
  v.require(violations == 0, violations, " monotonicity violations");
  double t = seconds_since(start);
  v.require(t < tol::kAnchorRuntimeS, "runtime ", t, " s");
  v.note("P(0.310 V, 4 ns)=", p, ", ", t, " s");
  return v;
}

Verdict cycle_counts() {
  Verdict v;
  auto start = std::chrono::steady_clock::now();
  auto add = schedule_and_map(build_stochastic_circuit(StochasticOp::ScaledAdd), {}, 256);
  v.require(add.logic_cycles == 4, "scaled add ", add.logic_cycles);
  for (auto [bits, expected] : {std::pair<std::size_t, std::size_t>{4, 9}, {8, 2 * (8 - 1) + 3}}) {
    auto adder = build_binary_adder(bits);
    auto s = schedule_and_map(adder.netlist, {}, 1);
    v.require(s.logic_cycles == expected, bits, "-bit adder ", s.logic_cycles);
    v.note(bits, "-bit adder ", s.logic_cycles);
  }
  double t = seconds_since(start);
  v.require(t < tol::kCycleRuntimeS, "runtime ", t, " s");
  v.note("scaled add ", add.logic_cycles);
  return v;
}

Verdict architecture_constants() {
  Verdict v;
  ArchConfig base;
  auto nl = build_stochastic_circuit(StochasticOp::Mult);
  auto mult_report = [&](const ArchConfig& cfg) {
    auto in = bind_inputs(nl, op_input_values(StochasticOp::Mult, 0.6, 0.7), cfg.bitstream_length, RandomSource(1));
    return execute_plan(plan_for(nl, cfg), in, cfg);
  };
  auto report = mult_report(base);
  auto acc = accumulate_outputs(report, base);
  v.require(acc.steps == 32, "accumulation steps ", acc.steps);

  for (std::size_t q : {1, 2, 4}) {
    ArchConfig one = base;
    one.q = q;
    one.bitstream_length = base.n * base.m * q;
    ArchConfig two = one;
    two.bitstream_length = 2 * base.n * base.m * q;
    auto r1 = mult_report(one);
    auto r2 = mult_report(two);
    v.require(r1.passes == 1 && r2.passes == 2, "q=", q, " passes ", r1.passes, "/", r2.passes);
    std::size_t per_pass = r1.total_cycles - r1.accumulation_steps;
    std::size_t fixed = r2.accumulation_steps + two.pass_transfer_cycles();
    v.require(r2.total_cycles == 2 * per_pass + fixed, "q=", q, " cycles ", r2.total_cycles, " vs ",
              2 * per_pass + fixed);
  }
  v.note("steps ", acc.steps, ", K=2 linear for q in {1,2,4}");
  return v;
}

struct OracleCase {
  StochasticOp op;
  double a;
  double b;
};

double oracle_target(const OracleCase& c) {
  switch (c.op) {
    case StochasticOp::ScaledAdd: return (c.a + c.b) / 2.0;
    case StochasticOp::Mult: return c.a * c.b;
    case StochasticOp::AbsSub: return c.a > c.b ? c.a - c.b : c.b - c.a;
    case StochasticOp::ScaledDiv: return c.a / c.b;
    case StochasticOp::Sqrt: return std::sqrt(c.a);
    case StochasticOp::Exp: {
      double x = 0.8 * c.a;
      return 1.0 - x + x * x / 2.0 - x * x * x / 6.0 + x * x * x * x / 24.0 - x * x * x * x * x / 120.0;
    }
  }
  return 0.0;
}

Verdict functional_oracles() {
  Verdict v;
  auto start = std::chrono::steady_clock::now();
  std::vector<OracleCase> cases;
  const std::array<double, 5> grid{0.1, 0.3, 0.5, 0.7, 0.9};
  for (double a : grid)
    for (double b : grid) {
      cases.push_back({StochasticOp::ScaledAdd, a, b});
      cases.push_back({StochasticOp::Mult, a, b});
      cases.push_back({StochasticOp::AbsSub, a, b});
      if (a <= b) cases.push_back({StochasticOp::ScaledDiv, a, b});
    }
  for (double a : {0.0, 0.05, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    cases.push_back({StochasticOp::Sqrt, a, 0.0});
    cases.push_back({StochasticOp::Exp, a, 0.0});
  }
  v.require(SqrtFit::max_error <= tol::kSqrtBound, "sqrt fit bound ", SqrtFit::max_error);

  double worst_sigma = 0.0;
  double worst_div = 0.0;
  double worst_exp = 0.0;
  double worst_sqrt = 0.0;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& c = cases[ci];
    auto nl = build_stochastic_circuit(c.op);
    auto values = op_input_values(c.op, c.a, c.b);
    double mean = 0.0;
    for (std::size_t t = 0; t < tol::kOracleTrials; ++t) {
      auto in = bind_inputs(nl, values, tol::kOracleLength, RandomSource(1000 + ci, t));
      mean += simulate_functional(nl, in).begin()->second.value() / tol::kOracleTrials;
    }
    double target = oracle_target(c);
    double err = std::abs(mean - target);
    switch (c.op) {
      case StochasticOp::ScaledAdd:
      case StochasticOp::Mult:
      case StochasticOp::AbsSub: {
        double sigma = std::sqrt(target * (1.0 - target) / (tol::kOracleLength * tol::kOracleTrials));
        double z = sigma > 0.0 ? err / sigma : (err == 0.0 ? 0.0 : INFINITY);
        worst_sigma = std::max(worst_sigma, z);
        v.require(z <= tol::kSigmas, to_string(c.op), "(", c.a, ",", c.b, ") off by ", z, " sigma");
        break;
      }
      case StochasticOp::ScaledDiv:
        worst_div = std::max(worst_div, err);
        v.require(err <= tol::kDivisionSlack, "div(", c.a, ",", c.b, ") err ", err);
        break;
      case StochasticOp::Exp:
        worst_exp = std::max(worst_exp, err);
        v.require(err <= tol::kExpSlack, "exp(", c.a, ") err ", err);
        break;
      case StochasticOp::Sqrt: {
        double sigma = std::sqrt(0.25 / (tol::kOracleLength * tol::kOracleTrials));
        worst_sqrt = std::max(worst_sqrt, err);
        v.require(err <= SqrtFit::max_error + tol::kSigmas * sigma, "sqrt(", c.a, ") err ", err);
        break;
      }
    }
  }
  double t = seconds_since(start);
  v.require(t < tol::kOracleRuntimeS, "runtime ", t, " s");
  v.note(cases.size(), " cases; worst ", worst_sigma, " sigma, div ", worst_div, ", exp ", worst_exp, ", sqrt ",
         worst_sqrt, "; ", t, " s");
  return v;
}

Verdict end_to_end_equivalence() {
  Verdict v;
  auto start = std::chrono::steady_clock::now();
  std::size_t checked = 0;
  for (auto mode : {ExecMode::BitParallel, ExecMode::BitSerial}) {
    ArchConfig cfg;
    cfg.mode = mode;
    cfg.bitstream_length = kAppLength;
    for (std::uint64_t seed : kSeeds) {
      for (auto op : kOps) {
        auto nl = build_stochastic_circuit(op);
        auto in = bind_inputs(nl, op_input_values(op, 0.45, 0.75), kAppLength, RandomSource(seed));
        auto report = execute_plan(plan_for(nl, cfg), in, cfg);
        auto golden = simulate_functional(nl, in);
        v.require(report.outputs.at("y") == golden.at(nl.net("y")), to_string(op), " differs in ", to_string(mode),
                  " seed ", seed);
        ++checked;
      }
      for (auto kind : kApps) {
        auto input = reduced_input(kind, seed);
        EvalOptions arch;
        arch.keep_streams = true;
        EvalOptions fun = arch;
        fun.engine = Engine::Functional;
        auto a = stochastic_eval(input, cfg, RandomSource(seed), arch);
        auto f = stochastic_eval(input, cfg, RandomSource(seed), fun);
        v.require(a.output_streams == f.output_streams, to_string(kind), " differs in ", to_string(mode), " seed ",
                  seed);
        ++checked;
      }
    }
  }
  double t = seconds_since(start);
  v.require(t < tol::kEquivalenceRuntimeS, "runtime ", t, " s");
  v.note(checked, " runs bit-identical, ", t, " s");
  return v;
}

Verdict energy_accounting() {
  Verdict v;
  ArchConfig cfg;
  auto nl = build_stochastic_circuit(StochasticOp::Mult);
  auto in = bind_inputs(nl, op_input_values(StochasticOp::Mult, 0.5, 0.5), cfg.bitstream_length, RandomSource(3));
  auto report = execute_plan(plan_for(nl, cfg), in, cfg);

  // Per bit: preset both operands and the output, write both operands stochastically, one AND.
  const double bl = static_cast<double>(cfg.bitstream_length);
  const auto& p = cfg.peripheral;
  EnergyBreakdown hand;
  hand.preset = 3.0 * bl * cfg.e_preset_aj;
  hand.init = 2.0 * bl * cfg.sbg_energy_aj();
  hand.logic = bl * cfg.gate_energy_aj.at(GateKind::And);
  hand.peripheral = static_cast<double>(cfg.subarrays()) * (p.subarray_driver_aj + p.local_accumulator_aj) +
                    static_cast<double>(cfg.n) * p.global_accumulator_aj + 2.0 * p.btos_read_aj;
  v.require(report.energy.preset == hand.preset, "preset ", report.energy.preset, " vs ", hand.preset);
  v.require(report.energy.init == hand.init, "init ", report.energy.init, " vs ", hand.init);
  v.require(report.energy.logic == hand.logic, "logic ", report.energy.logic, " vs ", hand.logic);
  v.require(report.energy.peripheral == hand.peripheral, "peripheral ", report.energy.peripheral, " vs ",
            hand.peripheral);
  v.require(report.energy.total() == hand.total(), "total ", report.energy.total(), " vs ", hand.total());

  for (auto kind : kApps) {
    auto r = stochastic_eval(reduced_input(kind, 1), cfg, RandomSource(1));
    const auto& e = r.energy;
    double parts = e.logic + e.preset + e.init + e.peripheral;
    bool nonneg = e.logic >= 0 && e.preset >= 0 && e.init >= 0 && e.peripheral >= 0;
    v.require(nonneg && e.logic > 0 && std::abs(parts - e.total()) <= 1e-9 * e.total(), to_string(kind),
              " breakdown does not partition the total");
    for (const auto& stage : r.stage_reports) {
      const auto& s = stage.energy;
      v.require(std::abs(s.logic + s.preset + s.init + s.peripheral - s.total()) <= 1e-9 * s.total(),
                to_string(kind), " stage breakdown");
    }
  }
  v.note("Mult ", report.energy.total(), " aJ exact; 4 apps partition");
  return v;
}

Verdict bitflip_tolerance() {
  Verdict v;
  auto start = std::chrono::steady_clock::now();
  ArchConfig cfg;
  cfg.bitstream_length = kAppLength;
  auto rates = default_flip_rates();
  SweepOptions opts;
  opts.trials = tol::kSweepTrials;
  for (auto kind : kApps) {
    auto points = error_sweep(reduced_input(kind, 1), rates, cfg, RandomSource(7), opts);
    std::ostringstream row;
    row << to_string(kind) << " [";
    for (std::size_t i = 0; i < points.size(); ++i) row << (i ? " " : "") << points[i].mean_error;
    row << "]";
    v.note(row.str());
    v.require(points.front().mean_error <= tol::kZeroFaultBound, to_string(kind), " zero-fault ",
              points.front().mean_error);
    v.require(points.back().mean_error < tol::kFlipErrorBound, to_string(kind), " at 20% ", points.back().mean_error);
    for (std::size_t i = 1; i < points.size(); ++i)
      v.require(points[i].mean_error >= points[i - 1].mean_error - points[i].std_error, to_string(kind),
                " not monotone at ", points[i].rate);
  }
  double t = seconds_since(start);
  v.require(t < tol::kSweepRuntimeS, "runtime ", t, " s");
  v.note(t, " s");
  return v;
}

Verdict lifetime_ordering() {
  Verdict v;
  ArchConfig par;
  ArchConfig ser = par;
  ser.mode = ExecMode::BitSerial;
  auto nl = build_stochastic_circuit(StochasticOp::Mult);
  auto in = bind_inputs(nl, op_input_values(StochasticOp::Mult, 0.5, 0.5), kAppLength, RandomSource(4));
  auto p = execute_plan(plan_for(nl, par), in, par);
  auto s = execute_plan(plan_for(nl, ser), in, ser);
  v.require(static_cast<double>(p.max_cell_writes) * tol::kMaxWriteRatio <= static_cast<double>(s.max_cell_writes),
            "Mult max writes ", p.max_cell_writes, " vs ", s.max_cell_writes);
  v.note("Mult max writes ", p.max_cell_writes, " vs ", s.max_cell_writes);
  for (auto kind : kApps) {
    auto c = lifetime_compare(reduced_input(kind, 1), par, ser, RandomSource(4));
    v.require(c.ratio >= tol::kLifetimeRatio, to_string(kind), " lifetime ratio ", c.ratio);
    v.note(to_string(kind), " ", c.ratio);
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known_failures;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--known-failure") known_failures.insert(std::atoi(argv[++i]));

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"device anchor and monotone switching", device_anchor},
      {"scheduler cycle counts", cycle_counts},
      {"accumulation steps and pass linearity", architecture_constants},
      {"functional oracles at 4096 bits", functional_oracles},
      {"architecture matches golden model", end_to_end_equivalence},
      {"energy closed form and breakdowns", energy_accounting},
      {"bit-flip tolerance", bitflip_tolerance},
      {"lifetime ordering", lifetime_ordering},
  };
  int status = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int number = static_cast<int>(i) + 1;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.require(false, "exception: ", e.what());
    }
    bool excused = !v.passed() && known_failures.contains(number);
    std::printf("%s %d %s: %s%s\n", v.passed() ? "PASS" : "FAIL", number, criteria[i].first, v.notes().c_str(),
                excused ? " [known failure]" : "");
    std::fflush(stdout);
    if (!v.passed() && !excused) status = 1;
  }
  return status;
}
