#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stochimc/netlist.hpp"

namespace stochimc {

struct SubarrayDims {
  std::size_t rows = 256;
  std::size_t cols = 256;
};

// A cell column within a row block. Block b spans rows [b*q, (b+1)*q); row r of the block holds
// sub-bitstream position r. Stochastic circuits use block 0 only; bus inputs put bit i in block i.
struct CellRef {
  std::uint32_t block = 0;
  std::uint32_t col = 0;

  bool operator==(const CellRef&) const = default;
};

struct Placement {
  NetId net = 0;
  std::uint32_t row = 0;   // first row
  std::uint32_t rows = 0;  // row count (q)
  std::uint32_t col = 0;
};

struct CopyOp {
  NetId net = 0;
  CellRef from;
  CellRef to;
  std::uint32_t cycle = 0;
};

enum class StepPhase : std::uint8_t { Pre, Serial, Post };

// One operation of a step: a gate instance or a copy, applied to every row of its block.
struct CellOp {
  std::optional<std::size_t> gate;  // index into Netlist::gates(); empty for copies
  NetId net = 0;                    // output net (copied net for copies)
  std::vector<CellRef> inputs;
  CellRef output;
};

// Everything issued in one cycle. Serial steps repeat once per row of the sub-bitstream.
struct Step {
  std::uint32_t cycle = 0;
  StepPhase phase = StepPhase::Pre;
  GateKind kind = GateKind::Buff;
  bool copy = false;
  std::vector<CellOp> ops;
};

struct ScheduleOptions {
  bool batch_copies = false;
  // Inputs written by transfer from an earlier partition: one init cycle per column instead of two.
  std::vector<NetId> transferred;
  std::size_t init_cycles_per_input = 2;
};

struct Schedule {
  std::size_t q = 1;
  std::size_t p = 0;           // primary-input columns
  std::size_t transfer_columns = 0;
  std::size_t blocks = 1;
  std::size_t cols_used = 0;
  std::size_t rows_used = 0;
  std::vector<Step> steps;
  std::vector<std::uint32_t> cycle_of_gate;  // by gate index
  std::vector<Placement> placements;
  std::vector<CopyOp> copies;
  std::vector<std::optional<CellRef>> home;  // by net: where the net is produced or written
  std::size_t pre_cycles = 0;
  std::size_t serial_cycles = 0;             // per row
  std::size_t post_cycles = 0;
  std::size_t logic_cycles = 0;
  std::size_t init_cycles = 0;

  bool has_serial_block() const { return serial_cycles > 0; }
  // Logic cycles when the serial block runs over `positions` consecutive bit positions.
  std::size_t logic_cycles_for(std::size_t positions) const {
    return pre_cycles + positions * serial_cycles + post_cycles;
  }
};

// Algorithm 1 over a primitive netlist. Throws CapacityError when the schedule does not fit.
Schedule schedule_and_map(const Netlist& netlist, const SubarrayDims& dims, std::size_t q,
                          const ScheduleOptions& options = {});

// Returns a description of every violated constraint; empty when the schedule is sound.
std::vector<std::string> check_schedule(const Netlist& netlist, const Schedule& schedule, const SubarrayDims& dims);

std::string dump_schedule(const Netlist& netlist, const Schedule& schedule);

// Per-cycle occupancy grid of one subarray.
std::string emit_occupancy_map(const Netlist& netlist, const Schedule& schedule);

struct Partition {
  Netlist netlist;
  Schedule schedule;
  std::vector<NetId> transferred;  // inputs carried over from earlier partitions
  std::vector<NetId> parent_net;   // partition net id -> parent net id
};

struct PartitionPlan {
  std::vector<Partition> parts;
  std::size_t q = 1;
  std::size_t chunks = 1;          // K = ceil(BL / q)
  std::size_t bitstream_length = 1;
  std::vector<NetId> outputs;      // primary outputs, as parent net ids
  std::vector<std::string> output_names;
};

struct PartitionOptions {
  std::optional<std::size_t> q;  // override
  ScheduleOptions schedule;
};

// Chooses the largest q that fits; splits the netlist into sequential partitions when even one
// column set does not fit.
PartitionPlan partition_circuit(const Netlist& netlist, const SubarrayDims& dims, std::size_t bitstream_length,
                                const PartitionOptions& options = {});

}  // namespace stochimc
