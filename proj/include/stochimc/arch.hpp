#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochimc/bitstream.hpp"
#include "stochimc/functional.hpp"
#include "stochimc/mtj.hpp"
#include "stochimc/scheduler.hpp"

namespace stochimc {

enum class ExecMode { BitParallel, BitSerial };
enum class OverflowPolicy { Pipeline, ParallelBanks };

std::string_view to_string(ExecMode mode);
std::string_view to_string(OverflowPolicy policy);

// Placeholder peripheral energies in aJ; not derived from circuit extraction.
struct PeripheralCosts {
  double subarray_driver_aj = 500.0;
  double btos_read_aj = 100.0;
  double local_accumulator_aj = 200.0;
  double global_accumulator_aj = 400.0;
};

struct ArchConfig {
  std::size_t n = 16;  // groups
  std::size_t m = 16;  // subarrays per group
  SubarrayDims dims;
  std::size_t bitstream_length = 256;
  unsigned resolution = 8;
  std::map<GateKind, double> gate_energy_aj = default_gate_energies();
  double e_preset_aj = 26.1;
  std::optional<double> e_sbg_aj;  // empty: min-energy pulse at p = 0.5
  PeripheralCosts peripheral;
  double cycle_time_s = 1e-9;
  ExecMode mode = ExecMode::BitParallel;
  OverflowPolicy overflow = OverflowPolicy::Pipeline;
  bool square_layout = false;
  bool toggle_only_writes = false;
  bool batch_copies = false;
  std::optional<std::size_t> transfer_cycles;  // per pass boundary; default n + m
  std::size_t init_cycles_per_input = 2;
  std::optional<std::size_t> q;                // sub-bitstream length override
  MtjParams mtj = calibrated_mtj_params();

  static std::map<GateKind, double> default_gate_energies();

  void validate() const;
  double sbg_energy_aj() const;
  std::size_t subarrays() const { return n * m; }
  std::size_t pass_transfer_cycles() const { return transfer_cycles.value_or(n + m); }
};

// Partition plan for the configured mode: bit-serial mode always uses q = 1.
PartitionPlan plan_for(const Netlist& netlist, const ArchConfig& config);

struct WriteCensus {
  std::size_t preset = 0;
  std::size_t sbg = 0;
  std::array<std::size_t, kGateKindCount> logic{};  // copies and transfers count as BUFF

  std::size_t logic_total() const;
  std::size_t total() const { return preset + sbg + logic_total(); }
};

// Gate census of one bit position of a plan: presets, stochastic writes and logic writes.
WriteCensus per_bit_census(const PartitionPlan& plan);

struct EnergyBreakdown {
  double logic = 0.0;
  double preset = 0.0;
  double init = 0.0;
  double peripheral = 0.0;

  double total() const { return preset + init + logic + peripheral; }
};

// Dense per-cell write counters for every subarray touched.
class WearMap {
 public:
  WearMap() = default;
  WearMap(std::size_t subarrays, std::size_t rows, std::size_t cols)
      : subarrays_(subarrays), rows_(rows), cols_(cols), counts_(subarrays * rows * cols, 0) {}

  std::uint32_t& at(std::size_t subarray, std::size_t row, std::size_t col) {
    return counts_[(subarray * rows_ + row) * cols_ + col];
  }
  std::uint32_t at(std::size_t subarray, std::size_t row, std::size_t col) const {
    return counts_[(subarray * rows_ + row) * cols_ + col];
  }
  std::size_t subarrays() const { return subarrays_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t utilized() const;
  std::size_t total() const;
  std::uint32_t max() const;

 private:
  std::size_t subarrays_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint32_t> counts_;
};

struct ExecutionReport {
  ExecMode mode = ExecMode::BitParallel;
  std::size_t bitstream_length = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t q = 0;
  std::size_t chunks = 0;
  std::size_t partitions = 0;
  std::size_t passes = 1;  // K
  std::size_t required_banks = 1;
  std::size_t logic_cycles = 0;
  std::size_t init_cycles = 0;
  std::size_t preset_cycles = 0;
  std::size_t transfer_cycles = 0;
  std::size_t accumulation_steps = 0;
  std::size_t total_cycles = 0;
  std::size_t input_columns = 0;  // stochastic input columns across partitions
  WriteCensus census;
  EnergyBreakdown energy;
  WearMap wear;
  std::size_t utilized_cells = 0;
  std::size_t total_writes = 0;
  std::size_t max_cell_writes = 0;
  std::map<std::string, Bitstream> outputs;
  std::map<std::string, std::vector<std::size_t>> ones_per_bank_pass;  // output -> ones per (bank, pass)
  std::map<std::string, std::size_t> binary_outputs;
};

// Runs the plan on the bank. `inputs` are keyed by the parent netlist's net ids.
ExecutionReport execute_plan(const PartitionPlan& plan, const StreamMap& inputs, const ArchConfig& config);

struct Accumulation {
  std::map<std::string, std::size_t> binary;
  std::size_t steps = 0;
  std::size_t local_register_bits = 0;
  std::size_t global_register_bits = 0;
};

Accumulation accumulate_outputs(const ExecutionReport& report, const ArchConfig& config);

EnergyBreakdown energy_total(const ExecutionReport& report, const ArchConfig& config);

// Closed form: BL x (per-bit preset, stochastic and gate energies) + peripheral.
EnergyBreakdown closed_form_energy(const PartitionPlan& plan, const ArchConfig& config);

double peripheral_energy(const ArchConfig& config, std::size_t input_columns);

struct Lifetime {
  double score = 0.0;
  std::size_t max_cell_writes = 0;
};

Lifetime lifetime_score(const ExecutionReport& report, double e_max);

}  // namespace stochimc
