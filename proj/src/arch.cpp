#include "stochimc/arch.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "stochimc/errors.hpp"

namespace stochimc {

namespace {

// Value a cell is preset to before a gate evaluates into it (toggle-only counting).
bool preset_value(GateKind kind) {
  switch (kind) {
    case GateKind::Buff:
    case GateKind::And:
    case GateKind::Or: return true;
    default: return false;
  }
}

bool eval_bit(GateKind kind, const std::array<std::uint64_t, 5>& in, std::size_t count) {
  return (eval_word(kind, std::span(in.data(), count)) & 1U) != 0;
}

std::size_t floor_log2(std::size_t x) { return x == 0 ? 0 : static_cast<std::size_t>(std::bit_width(x) - 1); }

// Cell values of one subarray for one partition: blocks*q rows by cols.
struct CellArray {
  std::size_t q = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> v;

  std::uint8_t& at(CellRef c, std::size_t r) { return v[(c.block * q + r) * cols + c.col]; }
};

class Executor {
 public:
  Executor(const PartitionPlan& plan, const StreamMap& inputs, const ArchConfig& config)
      : plan_(plan), inputs_(inputs), cfg_(config) {}

  ExecutionReport run() {
    cfg_.validate();
    const bool serial_mode = cfg_.mode == ExecMode::BitSerial;
    if (plan_.bitstream_length != cfg_.bitstream_length)
      throw ConfigError("plan bitstream length differs from the configured length");
    if (serial_mode && plan_.q != 1) throw ConfigError("bit-serial mode needs a q = 1 plan");
    std::size_t rows = 0, cols = 0;
    for (const auto& part : plan_.parts) {
      if (part.schedule.rows_used > cfg_.dims.rows || part.schedule.cols_used > cfg_.dims.cols)
        throw ConfigError("plan does not fit the configured subarray dimensions");
      if (part.schedule.q != plan_.q) throw ConfigError("partition q differs from the plan q");
      rows = std::max(rows, part.schedule.rows_used);
      cols = std::max(cols, part.schedule.cols_used);
    }

    const std::size_t bl = plan_.bitstream_length;
    const std::size_t q = plan_.q;
    const std::size_t chunks = plan_.chunks;
    const std::size_t per_bank = serial_mode ? 1 : cfg_.subarrays();
    const bool banks_parallel = !serial_mode && cfg_.overflow == OverflowPolicy::ParallelBanks;
    const std::size_t banks = banks_parallel ? (chunks + per_bank - 1) / per_bank : 1;
    const std::size_t passes = banks_parallel ? 1 : (chunks + per_bank - 1) / per_bank;
    const std::size_t chunks_per_pass = banks_parallel ? chunks : per_bank;
    const std::size_t touched = std::min(chunks, per_bank * banks);

    report_.mode = cfg_.mode;
    report_.bitstream_length = bl;
    report_.n = cfg_.n;
    report_.m = cfg_.m;
    report_.q = q;
    report_.chunks = chunks;
    report_.partitions = plan_.parts.size();
    report_.passes = passes;
    report_.required_banks = banks;
    report_.wear = WearMap(touched, rows, cols);
    for (const auto& part : plan_.parts) report_.input_columns += part.schedule.p - part.schedule.transfer_columns;

    for (std::size_t pass = 0; pass < passes; ++pass) {
      std::size_t first = pass * chunks_per_pass;
      std::size_t last = std::min(chunks, first + chunks_per_pass);
      std::size_t bits_in_pass = std::min(bl, last * q) - first * q;
      for (std::size_t pi = 0; pi < plan_.parts.size(); ++pi) {
        run_part(pi, first, last, per_bank);
        const Schedule& s = plan_.parts[pi].schedule;
        report_.init_cycles += s.init_cycles;
        report_.logic_cycles += s.has_serial_block() ? s.logic_cycles_for(bits_in_pass) : s.logic_cycles;
        report_.preset_cycles += 1;
      }
    }
    report_.transfer_cycles = passes > 1 ? (passes - 1) * cfg_.pass_transfer_cycles() : 0;
    report_.accumulation_steps = serial_mode ? 1 : cfg_.n + cfg_.m;
    report_.total_cycles = report_.init_cycles + report_.logic_cycles + report_.preset_cycles +
                           report_.accumulation_steps + report_.transfer_cycles;

    collect_outputs(per_bank, banks_parallel ? banks : passes);
    report_.utilized_cells = report_.wear.utilized();
    report_.total_writes = report_.wear.total();
    report_.max_cell_writes = report_.wear.max();
    report_.energy = energy_total(report_, cfg_);
    return std::move(report_);
  }

 private:
  const Bitstream& source_stream(const Partition& part, NetId sub_net) const {
    NetId parent = part.parent_net.at(sub_net);
    if (auto it = store_.find(parent); it != store_.end()) return it->second;
    auto it = inputs_.find(parent);
    if (it == inputs_.end()) throw DomainError("primary input '" + part.netlist.net_name(sub_net) + "' is unbound");
    if (it->second.size() != plan_.bitstream_length) throw DomainError("input stream length differs from BL");
    return it->second;
  }

  void count_write(std::size_t subarray, CellRef cell, std::size_t r, std::size_t q) {
    ++report_.wear.at(subarray, cell.block * q + r, cell.col);
  }

  void run_part(std::size_t part_index, std::size_t first_chunk, std::size_t last_chunk, std::size_t per_bank) {
    const Partition& part = plan_.parts[part_index];
    const Schedule& s = part.schedule;
    const Netlist& nl = part.netlist;
    const std::size_t q = plan_.q;
    const std::size_t bl = plan_.bitstream_length;
    const bool toggle = cfg_.toggle_only_writes;
    std::vector<char> transferred(nl.net_count(), 0);
    for (NetId t : part.transferred) transferred[t] = 1;

    const std::size_t count = last_chunk - first_chunk;
    std::vector<CellArray> arrays(count);
    auto rows_of = [&](std::size_t c) { return std::min(bl, (c + 1) * q) - c * q; };
    auto subarray_of = [&](std::size_t c) { return c % (per_bank * std::max<std::size_t>(1, report_.required_banks)); };

    for (std::size_t i = 0; i < count; ++i) {
      std::size_t c = first_chunk + i;
      CellArray& a = arrays[i];
      a.q = q;
      a.cols = s.cols_used;
      a.v.assign(s.blocks * q * std::max<std::size_t>(1, s.cols_used), 0);
      std::size_t sub = subarray_of(c);
      for (const auto& pi : nl.inputs()) {
        const Bitstream& stream = source_stream(part, pi.net);
        CellRef cell = *s.home[pi.net];
        for (std::size_t r = 0; r < rows_of(c); ++r) {
          bool v = stream.get(c * q + r);
          a.at(cell, r) = v;
          ++report_.census.preset;
          count_write(sub, cell, r, q);
          bool counted = !toggle || v;
          if (transferred[pi.net]) {
            if (counted) ++report_.census.logic[static_cast<std::size_t>(GateKind::Buff)];
          } else {
            if (counted) ++report_.census.sbg;
          }
          if (counted) count_write(sub, cell, r, q);
        }
      }
    }

    auto apply = [&](const Step& step, CellArray& a, std::size_t sub, std::size_t r) {
      std::array<std::uint64_t, 5> in{};
      for (const auto& op : step.ops) {
        bool v = false;
        if (step.copy) {
          v = a.at(op.inputs[0], r) != 0;
        } else if (step.kind == GateKind::State) {
          v = latch_[{part_index, *op.gate}];
        } else {
          for (std::size_t k = 0; k < op.inputs.size(); ++k) in[k] = a.at(op.inputs[k], r);
          v = eval_bit(step.kind, in, op.inputs.size());
        }
        a.at(op.output, r) = v;
        ++report_.census.preset;
        count_write(sub, op.output, r, plan_.q);
        GateKind kind = step.copy ? GateKind::Buff : step.kind;
        if (!toggle || v != preset_value(kind)) {
          ++report_.census.logic[static_cast<std::size_t>(kind)];
          count_write(sub, op.output, r, plan_.q);
        }
      }
    };

    auto run_phase = [&](StepPhase phase) {
      for (std::size_t i = 0; i < count; ++i) {
        std::size_t c = first_chunk + i;
        for (const auto& step : s.steps)
          if (step.phase == phase)
            for (std::size_t r = 0; r < rows_of(c); ++r) apply(step, arrays[i], subarray_of(c), r);
      }
    };

    run_phase(StepPhase::Pre);
    if (s.has_serial_block()) {
      // Bit positions in order; each STATE latches its input after the position completes.
      for (std::size_t i = 0; i < count; ++i) {
        std::size_t c = first_chunk + i;
        for (std::size_t r = 0; r < rows_of(c); ++r) {
          for (const auto& step : s.steps)
            if (step.phase == StepPhase::Serial) apply(step, arrays[i], subarray_of(c), r);
          for (const auto& step : s.steps)
            if (step.kind == GateKind::State && step.phase == StepPhase::Serial)
              for (const auto& op : step.ops) latch_[{part_index, *op.gate}] = arrays[i].at(op.inputs[0], r) != 0;
        }
      }
    }
    run_phase(StepPhase::Post);

    // Outputs of this partition go to the buffer, bit-exact, for later partitions and readout.
    for (NetId po : nl.outputs()) {
      NetId parent = part.parent_net.at(po);
      auto [it, inserted] = store_.try_emplace(parent, Bitstream(bl));
      CellRef cell = *s.home[po];
      for (std::size_t i = 0; i < count; ++i) {
        std::size_t c = first_chunk + i;
        for (std::size_t r = 0; r < rows_of(c); ++r) it->second.set(c * q + r, arrays[i].at(cell, r) != 0);
      }
    }
  }

  void collect_outputs(std::size_t per_bank, std::size_t groups) {
    const std::size_t span = per_bank * plan_.q;
    for (std::size_t i = 0; i < plan_.outputs.size(); ++i) {
      const std::string& name = plan_.output_names[i];
      auto it = store_.find(plan_.outputs[i]);
      Bitstream bs = it != store_.end() ? it->second : source_input(plan_.outputs[i], name);
      std::vector<std::size_t> ones(groups, 0);
      for (std::size_t b = 0; b < bs.size(); ++b)
        if (bs.get(b)) ++ones[std::min(groups - 1, b / span)];
      report_.binary_outputs[name] = bs.ones();
      report_.ones_per_bank_pass[name] = std::move(ones);
      report_.outputs.emplace(name, std::move(bs));
    }
  }

  // A primary output wired straight to a primary input.
  Bitstream source_input(NetId parent, const std::string& name) const {
    auto it = inputs_.find(parent);
    if (it == inputs_.end()) throw DomainError("primary output '" + name + "' has no driver or binding");
    return it->second;
  }

 private:
  const PartitionPlan& plan_;
  const StreamMap& inputs_;
  const ArchConfig& cfg_;
  ExecutionReport report_;
  std::map<NetId, Bitstream> store_;
  std::map<std::pair<std::size_t, std::size_t>, bool> latch_;
};

}  // namespace

std::string_view to_string(ExecMode mode) { return mode == ExecMode::BitParallel ? "bit-parallel" : "bit-serial"; }

std::string_view to_string(OverflowPolicy policy) {
  return policy == OverflowPolicy::Pipeline ? "pipeline" : "parallel-banks";
}

std::map<GateKind, double> ArchConfig::default_gate_energies() {
  return {{GateKind::Not, 30.7},  {GateKind::Buff, 73.8},  {GateKind::Nand, 28.7}, {GateKind::Nor, 8.4},
          {GateKind::Maj3b, 7.6}, {GateKind::Maj5b, 6.3},  {GateKind::And, 28.7},  {GateKind::Or, 8.4},
          {GateKind::State, 73.8}};
}

void ArchConfig::validate() const {
  if (n < 1 || m < 1) throw ConfigError("n and m must be at least 1");
  if (square_layout && n != m) throw ConfigError("square layout requires n == m");
  if (bitstream_length < 1) throw ConfigError("bitstream length must be at least 1");
  if (dims.rows < 1 || dims.cols < 1) throw ConfigError("subarray dimensions must be positive");
  if (resolution < 1 || resolution > 16) throw ConfigError("resolution must be in [1,16]");
  if (e_preset_aj < 0.0 || (e_sbg_aj && *e_sbg_aj < 0.0)) throw ConfigError("energies must be non-negative");
  for (const auto& [kind, e] : gate_energy_aj)
    if (e < 0.0) throw ConfigError("gate energy for " + std::string(to_string(kind)) + " is negative");
  if (peripheral.subarray_driver_aj < 0 || peripheral.btos_read_aj < 0 || peripheral.local_accumulator_aj < 0 ||
      peripheral.global_accumulator_aj < 0)
    throw ConfigError("peripheral energies must be non-negative");
  if (!(cycle_time_s > 0.0)) throw ConfigError("cycle time must be positive");
}

double ArchConfig::sbg_energy_aj() const {
  if (e_sbg_aj) return *e_sbg_aj;
  auto grid = default_duration_grid();
  PulseSpec pulse = min_energy_pulse(mtj, 0.5, grid);
  return switch_energy(pulse, mtj.r_p) * 1e18;
}

PartitionPlan plan_for(const Netlist& netlist, const ArchConfig& config) {
  PartitionOptions options;
  options.q = config.mode == ExecMode::BitSerial ? std::optional<std::size_t>(1) : config.q;
  options.schedule.batch_copies = config.batch_copies;
  options.schedule.init_cycles_per_input = config.init_cycles_per_input;
  return partition_circuit(netlist, config.dims, config.bitstream_length, options);
}

std::size_t WriteCensus::logic_total() const { return std::accumulate(logic.begin(), logic.end(), std::size_t{0}); }

WriteCensus per_bit_census(const PartitionPlan& plan) {
  WriteCensus c;
  for (const auto& part : plan.parts) {
    const auto& nl = part.netlist;
    c.preset += nl.inputs().size();
    c.sbg += nl.inputs().size() - part.transferred.size();
    c.logic[static_cast<std::size_t>(GateKind::Buff)] += part.transferred.size();
    for (const auto& step : part.schedule.steps) {
      c.preset += step.ops.size();
      GateKind kind = step.copy ? GateKind::Buff : step.kind;
      c.logic[static_cast<std::size_t>(kind)] += step.ops.size();
    }
  }
  return c;
}

std::size_t WearMap::utilized() const {
  return static_cast<std::size_t>(std::count_if(counts_.begin(), counts_.end(), [](std::uint32_t v) { return v > 0; }));
}

std::size_t WearMap::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

std::uint32_t WearMap::max() const { return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end()); }

ExecutionReport execute_plan(const PartitionPlan& plan, const StreamMap& inputs, const ArchConfig& config) {
  Executor exec(plan, inputs, config);
  return exec.run();
}

Accumulation accumulate_outputs(const ExecutionReport& report, const ArchConfig& config) {
  Accumulation acc;
  if (report.mode == ExecMode::BitSerial) {
    acc.steps = 1;
    acc.local_register_bits = acc.global_register_bits = floor_log2(report.bitstream_length) + 1;
  } else {
    acc.steps = config.n + config.m;
    std::size_t q = std::max<std::size_t>(1, report.q);
    acc.local_register_bits = floor_log2(config.m * q) + 1;
    acc.global_register_bits = floor_log2(config.n * config.m * q) + 1;
  }
  const std::size_t capacity = (std::size_t{1} << acc.global_register_bits) - 1;
  for (const auto& [name, bs] : report.outputs) {
    auto it = report.ones_per_bank_pass.find(name);
    if (it != report.ones_per_bank_pass.end() && report.mode == ExecMode::BitParallel)
      for (std::size_t ones : it->second)
        if (ones > capacity)
          throw OverflowError("output '" + name + "' ones count exceeds the global accumulator capacity");
    acc.binary[name] = bs.ones();
  }
  return acc;
}

double peripheral_energy(const ArchConfig& config, std::size_t input_columns) {
  const auto& p = config.peripheral;
  if (config.mode == ExecMode::BitSerial)
    return p.subarray_driver_aj + p.local_accumulator_aj + static_cast<double>(input_columns) * p.btos_read_aj;
  auto sa = static_cast<double>(config.subarrays());
  return sa * (p.subarray_driver_aj + p.local_accumulator_aj) + static_cast<double>(config.n) * p.global_accumulator_aj +
         static_cast<double>(input_columns) * p.btos_read_aj;
}

namespace {

double logic_energy(const std::array<std::size_t, kGateKindCount>& counts, const ArchConfig& config, double scale) {
  double total = 0.0;
  for (std::size_t k = 0; k < kGateKindCount; ++k) {
    if (counts[k] == 0) continue;
    auto kind = static_cast<GateKind>(k);
    auto it = config.gate_energy_aj.find(kind);
    if (it == config.gate_energy_aj.end())
      throw ConfigError("no energy entry for gate kind " + std::string(to_string(kind)));
    total += static_cast<double>(counts[k]) * scale * it->second;
  }
  return total;
}

}  // namespace

EnergyBreakdown energy_total(const ExecutionReport& report, const ArchConfig& config) {
  EnergyBreakdown e;
  e.preset = static_cast<double>(report.census.preset) * config.e_preset_aj;
  e.init = static_cast<double>(report.census.sbg) * config.sbg_energy_aj();
  e.logic = logic_energy(report.census.logic, config, 1.0);
  e.peripheral = peripheral_energy(config, report.input_columns);
  return e;
}

EnergyBreakdown closed_form_energy(const PartitionPlan& plan, const ArchConfig& config) {
  WriteCensus c = per_bit_census(plan);
  auto bl = static_cast<double>(plan.bitstream_length);
  EnergyBreakdown e;
  e.preset = static_cast<double>(c.preset) * bl * config.e_preset_aj;
  e.init = static_cast<double>(c.sbg) * bl * config.sbg_energy_aj();
  e.logic = logic_energy(c.logic, config, bl);
  std::size_t inputs = 0;
  for (const auto& part : plan.parts) inputs += part.schedule.p - part.schedule.transfer_columns;
  e.peripheral = peripheral_energy(config, inputs);
  return e;
}

Lifetime lifetime_score(const ExecutionReport& report, double e_max) {
  if (report.total_writes == 0) throw DomainError("lifetime undefined for a run without writes");
  return {e_max * static_cast<double>(report.utilized_cells) / static_cast<double>(report.total_writes),
          report.max_cell_writes};
}

}  // namespace stochimc
