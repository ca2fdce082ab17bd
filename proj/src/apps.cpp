#include "stochimc/apps.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>

#include "stochimc/circuits.hpp"
#include "stochimc/errors.hpp"
#include "stochimc/functional.hpp"

namespace stochimc {

namespace {

constexpr std::size_t kExpBlocks = 5;
constexpr std::size_t kExpCopies = 5;

std::string indexed(std::string_view stem, std::size_t i) { return std::string(stem) + std::to_string(i); }

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(what + " must lie in [0,1]");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// --- circuits ---

AppStage ol_stage() {
  CircuitBuilder b;
  NetId y = b.input("p0");
  for (std::size_t j = 1; j < 6; ++j) y = b.mult(y, b.input(indexed("p", j)));
  b.output(y, "y");
  return {"ol", b.take()};
}

AppStage hdp_stage() {
  CircuitBuilder b;
  NetId bp = b.input("bp");
  NetId cp = b.input("cp");
  NetId e = b.input("e");
  NetId d = b.input("d");
  NetId t_ed = b.input("t_ed");
  NetId t_end = b.input("t_end");
  NetId t_ned = b.input("t_ned");
  NetId t_nend = b.input("t_nend");
  NetId h = b.weighted_sum(e, b.weighted_sum(d, t_ed, t_end), b.weighted_sum(d, t_ned, t_nend));
  NetId num = b.mult(b.mult(bp, cp), h);
  NetId rest = b.mult(b.mult(b.complement(bp), b.complement(cp)), b.complement(h));
  NetId den = b.disjoint_add(num, rest);
  b.output(b.scaled_div(num, den), "y");
  return {"hdp", b.take()};
}

AppStage kde_stage(std::size_t history, double lambda) {
  CircuitBuilder b;
  std::vector<NetId> terms;
  std::uint64_t lineage = 1;
  for (std::size_t i = 0; i < history; ++i) {
    NetId term = 0;
    for (std::size_t blk = 0; blk < kExpBlocks; ++blk) {
      std::array<NetId, kExpCopies> copies{};
      for (std::size_t j = 0; j < kExpCopies; ++j) {
        std::string tag = std::to_string(i) + "_" + std::to_string(blk * kExpCopies + j);
        NetId x = b.input("x" + tag, lineage);
        NetId h = b.input("h" + tag, lineage);
        ++lineage;
        copies[j] = b.abs_sub(x, h);
      }
      NetId factor = b.exp(copies, lambda / static_cast<double>(kExpBlocks));
      term = blk == 0 ? factor : b.mult(term, factor);
    }
    terms.push_back(term);
  }
  b.output(b.mux_average(terms), "y");
  return {"kde", b.take()};
}

AppStage lit_moments_stage(std::size_t cells) {
  CircuitBuilder b;
  std::vector<NetId> a(cells), c(cells), sq(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    a[i] = b.input(indexed("a", i));
    c[i] = b.input(indexed("b", i));
    sq[i] = b.mult(a[i], c[i]);
  }
  NetId s2 = b.mux_average(sq);
  NetId mean_a = b.mux_average(a);
  NetId mean_b = b.mux_average(c);
  NetId msq = b.mult(mean_a, mean_b);
  b.output(s2, "s2");
  b.output(msq, "msq");
  b.output(mean_a, "m");
  return {"moments", b.take()};
}

AppStage lit_threshold_stage() {
  CircuitBuilder b;
  NetId s2_1 = b.input("s2_1", 1);
  NetId msq_1 = b.input("msq_1", 1);
  NetId s2_2 = b.input("s2_2", 2);
  NetId msq_2 = b.input("msq_2", 2);
  NetId mean = b.input("mean");
  NetId one = b.constant("one", 1.0);
  NetId half = b.constant("half", 0.5);
  NetId c1 = b.constant("c1", SqrtFit::c1);
  NetId c2 = b.constant("c2", SqrtFit::c2);
  NetId sigma = b.sqrt(b.abs_sub(s2_1, msq_1), b.abs_sub(s2_2, msq_2), c1, c2);
  NetId t = b.scaled_add(sigma, one, half);
  b.output(b.mult(t, mean), "y");
  return {"threshold", b.take()};
}

// --- per-instance input values ---

using Decoded = std::map<std::string, double>;

InputValues stage_values(const AppInput& input, std::size_t stage, std::size_t inst, const Decoded& previous) {
  InputValues v;
  std::visit(overloaded{
                 [&](const LitInput& in) {
                   if (stage == 0) {
                     auto w = in.image.window(inst % in.image.width(), inst / in.image.width(), in.window);
                     for (std::size_t i = 0; i < w.size(); ++i) {
                       v[indexed("a", i)] = w[i];
                       v[indexed("b", i)] = w[i];
                     }
                   } else {
                     v["s2_1"] = v["s2_2"] = previous.at("s2");
                     v["msq_1"] = v["msq_2"] = previous.at("msq");
                     v["mean"] = previous.at("m");
                   }
                 },
                 [&](const OlInput& in) {
                   for (std::size_t j = 0; j < 6; ++j) v[indexed("p", j)] = in.likelihoods[inst][j];
                 },
                 [&](const HdpInput& in) {
                   const HdpCase& c = in.cases[inst];
                   v = {{"bp", c.bp}, {"cp", c.cp}, {"e", c.e}, {"d", c.d}, {"t_ed", c.hd_given[0]},
                        {"t_end", c.hd_given[1]}, {"t_ned", c.hd_given[2]}, {"t_nend", c.hd_given[3]}};
                 },
                 [&](const KdeInput& in) {
                   double x = in.current.pixels()[inst] / 255.0;
                   for (std::size_t i = 0; i < in.history.size(); ++i) {
                     double h = in.history[i].pixels()[inst] / 255.0;
                     for (std::size_t k = 0; k < kExpBlocks * kExpCopies; ++k) {
                       std::string tag = std::to_string(i) + "_" + std::to_string(k);
                       v["x" + tag] = x;
                       v["h" + tag] = h;
                     }
                   }
                 },
             },
             input);
  return v;
}

std::map<std::string, Bitstream> named_outputs(const Netlist& nl, const StreamMap& streams) {
  std::map<std::string, Bitstream> out;
  for (const auto& [net, bs] : streams) out.emplace(nl.net_name(net), bs);
  return out;
}

struct StageRuntime {
  const AppStage* stage = nullptr;
  std::optional<PartitionPlan> plan;
  std::vector<NetId> fault_nets;
};

struct InstanceOutcome {
  double value = 0.0;
  Bitstream stream;
  EnergyBreakdown energy;
  std::size_t cycles = 0;
  std::vector<ExecutionReport> reports;
};

InstanceOutcome run_instance(const AppInput& input, const std::vector<StageRuntime>& stages, std::size_t inst,
                             const ArchConfig& config, const RandomSource& source, const EvalOptions& options,
                             bool keep_reports) {
  InstanceOutcome outcome;
  const RandomSource inst_src = source.child(static_cast<std::uint64_t>(inst));
  Decoded decoded;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const StageRuntime& rt = stages[s];
    const Netlist& nl = rt.stage->netlist;
    const RandomSource stage_src = inst_src.child(rt.stage->name);
    StreamMap bound = bind_inputs(nl, stage_values(input, s, inst, decoded), config.bitstream_length, stage_src);
    std::map<std::string, Bitstream> outs;
    if (options.engine == Engine::Functional) {
      NetFaults faults{options.flip_rate, rt.fault_nets, stage_src.child("faults")};
      outs = named_outputs(nl, simulate_functional(nl, bound, options.flip_rate > 0.0 ? &faults : nullptr));
    } else {
      ExecutionReport report = execute_plan(*rt.plan, bound, config);
      outcome.energy.logic += report.energy.logic;
      outcome.energy.preset += report.energy.preset;
      outcome.energy.init += report.energy.init;
      outcome.energy.peripheral += report.energy.peripheral;
      outcome.cycles += report.total_cycles;
      outs = report.outputs;
      if (keep_reports) outcome.reports.push_back(std::move(report));
    }
    decoded.clear();
    for (const auto& [name, bs] : outs) decoded[name] = decode_unipolar(bs);
    if (s + 1 == stages.size()) {
      outcome.value = decoded.at("y");
      outcome.stream = outs.at("y");
    }
  }
  return outcome;
}

}  // namespace

std::string_view to_string(AppKind kind) {
  switch (kind) {
    case AppKind::Lit: return "lit";
    case AppKind::Ol: return "ol";
    case AppKind::Hdp: return "hdp";
    case AppKind::Kde: return "kde";
  }
  return "?";
}

std::optional<AppKind> parse_app_kind(std::string_view text) {
  for (AppKind k : {AppKind::Lit, AppKind::Ol, AppKind::Hdp, AppKind::Kde})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

AppKind kind_of(const AppInput& input) {
  return std::visit(overloaded{[](const LitInput&) { return AppKind::Lit; },
                               [](const OlInput&) { return AppKind::Ol; },
                               [](const HdpInput&) { return AppKind::Hdp; },
                               [](const KdeInput&) { return AppKind::Kde; }},
                    input);
}

void validate(const AppInput& input) {
  std::visit(overloaded{
                 [](const LitInput& in) {
                   if (in.image.size() == 0) throw DomainError("LIT image is empty");
                   if (in.window == 0) throw DomainError("LIT window must be positive");
                 },
                 [](const OlInput& in) {
                   if (in.width == 0 || in.height == 0) throw DomainError("OL grid must be non-empty");
                   if (in.likelihoods.size() != in.width * in.height)
                     throw DomainError("OL likelihood count does not match the grid");
                   for (const auto& pt : in.likelihoods)
                     for (double p : pt) check_probability(p, "OL likelihood");
                 },
                 [](const HdpInput& in) {
                   if (in.cases.empty()) throw DomainError("HDP input has no cases");
                   for (const auto& c : in.cases) {
                     for (double p : {c.bp, c.cp, c.e, c.d}) check_probability(p, "HDP probability");
                     for (double p : c.hd_given) check_probability(p, "HDP conditional");
                   }
                 },
                 [](const KdeInput& in) {
                   if (in.history.empty()) throw DomainError("KDE history is empty");
                   if (in.current.size() == 0) throw DomainError("KDE current frame is empty");
                   for (const auto& h : in.history)
                     if (h.width() != in.current.width() || h.height() != in.current.height())
                       throw DomainError("KDE history frame size differs from the current frame");
                   if (!(in.lambda > 0.0 && in.lambda <= static_cast<double>(kExpBlocks)))
                     throw DomainError("KDE lambda must lie in (0, 5]");
                 },
             },
             input);
}

std::size_t instance_count(const AppInput& input) {
  return std::visit(overloaded{[](const LitInput& in) { return in.image.size(); },
                               [](const OlInput& in) { return in.likelihoods.size(); },
                               [](const HdpInput& in) { return in.cases.size(); },
                               [](const KdeInput& in) { return in.current.size(); }},
                    input);
}

double lit_threshold(std::span<const double> window) {
  if (window.empty()) throw DomainError("empty window");
  double n = static_cast<double>(window.size());
  double mean = std::accumulate(window.begin(), window.end(), 0.0) / n;
  double sq = std::inner_product(window.begin(), window.end(), window.begin(), 0.0) / n;
  double sigma = std::sqrt(std::max(0.0, sq - mean * mean));
  return mean * (sigma + 1.0) / 2.0;
}

double hdp_probability(const HdpCase& c) {
  double h = c.e * (c.d * c.hd_given[0] + (1 - c.d) * c.hd_given[1]) +
             (1 - c.e) * (c.d * c.hd_given[2] + (1 - c.d) * c.hd_given[3]);
  double num = c.bp * c.cp * h;
  double den = num + (1 - c.bp) * (1 - c.cp) * (1 - h);
  return den > 0.0 ? num / den : 0.0;
}

double kde_density(double current, std::span<const double> history, double lambda) {
  if (history.empty()) throw DomainError("empty history");
  double sum = 0.0;
  for (double h : history) sum += std::exp(-lambda * std::abs(current - h));
  return sum / static_cast<double>(history.size());
}

std::vector<double> golden_eval(const AppInput& input) {
  validate(input);
  std::vector<double> out(instance_count(input));
  std::visit(overloaded{
                 [&](const LitInput& in) {
                   for (std::size_t i = 0; i < out.size(); ++i)
                     out[i] = lit_threshold(in.image.window(i % in.image.width(), i / in.image.width(), in.window));
                 },
                 [&](const OlInput& in) {
                   for (std::size_t i = 0; i < out.size(); ++i) {
                     double p = 1.0;
                     for (double v : in.likelihoods[i]) p *= v;
                     out[i] = p;
                   }
                 },
                 [&](const HdpInput& in) {
                   for (std::size_t i = 0; i < out.size(); ++i) out[i] = hdp_probability(in.cases[i]);
                 },
                 [&](const KdeInput& in) {
                   std::vector<double> hist(in.history.size());
                   for (std::size_t i = 0; i < out.size(); ++i) {
                     for (std::size_t k = 0; k < hist.size(); ++k) hist[k] = in.history[k].pixels()[i] / 255.0;
                     out[i] = kde_density(in.current.pixels()[i] / 255.0, hist, in.lambda);
                   }
                 },
             },
             input);
  return out;
}

AppCircuit build_app_circuit(const AppInput& input) {
  validate(input);
  AppCircuit circuit;
  circuit.kind = kind_of(input);
  std::visit(overloaded{
                 [&](const LitInput& in) {
                   circuit.stages.push_back(lit_moments_stage(in.window * in.window));
                   circuit.stages.push_back(lit_threshold_stage());
                 },
                 [&](const OlInput&) { circuit.stages.push_back(ol_stage()); },
                 [&](const HdpInput&) { circuit.stages.push_back(hdp_stage()); },
                 [&](const KdeInput& in) { circuit.stages.push_back(kde_stage(in.history.size(), in.lambda)); },
             },
             input);
  return circuit;
}

namespace {

std::vector<NetId> boundary_nets(const Netlist& nl) {
  std::set<NetId> seen;
  std::vector<NetId> nets;
  for (const auto& op : nl.ops()) {
    for (NetId n : op.inputs)
      if (seen.insert(n).second) nets.push_back(n);
    if (seen.insert(op.output).second) nets.push_back(op.output);
  }
  return nets;
}

}  // namespace

std::vector<std::string> node_trace(const AppCircuit& circuit) {
  std::vector<std::string> trace;
  for (const auto& stage : circuit.stages)
    for (NetId n : boundary_nets(stage.netlist)) trace.push_back(stage.name + ":" + stage.netlist.net_name(n));
  return trace;
}

double mean_absolute_error_percent(std::span<const double> golden, std::span<const double> stochastic) {
  if (golden.size() != stochastic.size()) throw DomainError("golden and stochastic sizes differ");
  if (golden.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < golden.size(); ++i) sum += std::abs(golden[i] - stochastic[i]);
  return 100.0 * sum / static_cast<double>(golden.size());
}

AppResult stochastic_eval(const AppInput& input, const ArchConfig& config, const RandomSource& source,
                          const EvalOptions& options) {
  if (!(options.flip_rate >= 0.0 && options.flip_rate <= 1.0)) throw DomainError("flip rate must lie in [0,1]");
  if (options.flip_rate > 0.0 && options.engine != Engine::Functional)
    throw DomainError("fault injection runs on the functional engine");
  config.validate();
  const AppCircuit circuit = build_app_circuit(input);
  AppResult result;
  result.kind = circuit.kind;
  result.golden = golden_eval(input);
  result.trace = node_trace(circuit);

  std::vector<StageRuntime> stages;
  for (const auto& stage : circuit.stages) {
    auto& rt = stages.emplace_back();
    rt.stage = &stage;
    if (options.engine == Engine::Architecture) rt.plan.emplace(plan_for(stage.netlist, config));
    rt.fault_nets = boundary_nets(stage.netlist);
  }

  const std::size_t count = instance_count(input);
  std::vector<InstanceOutcome> outcomes(count);
  std::exception_ptr failure;
  const bool parallel = options.policy == ExecPolicy::Parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::size_t i = 0; i < count; ++i) {
    try {
      outcomes[i] = run_instance(input, stages, i, config, source, options, i == 0);
    } catch (...) {
#pragma omp critical(stochimc_app_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  result.stochastic.reserve(count);
  for (auto& o : outcomes) {
    result.stochastic.push_back(o.value);
    result.energy.logic += o.energy.logic;
    result.energy.preset += o.energy.preset;
    result.energy.init += o.energy.init;
    result.energy.peripheral += o.energy.peripheral;
    result.total_cycles += o.cycles;
    if (options.keep_streams) result.output_streams.push_back(std::move(o.stream));
  }
  if (!outcomes.empty()) result.stage_reports = std::move(outcomes.front().reports);
  result.mae_percent = mean_absolute_error_percent(result.golden, result.stochastic);
  return result;
}

}  // namespace stochimc
