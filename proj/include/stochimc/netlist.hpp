#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stochimc {

// Primitive in-array gates, plus the XOR and MUX composites used by circuit builders.
// MUX inputs are (select, a, b) and yield a when select is 1.
enum class GateKind : std::uint8_t { Buff, Not, And, Nand, Or, Nor, Maj3b, Maj5b, State, Xor, Mux };

inline constexpr std::size_t kGateKindCount = 11;

std::string_view to_string(GateKind kind);
std::optional<GateKind> parse_gate_kind(std::string_view text);
std::size_t arity(GateKind kind);
bool is_primitive(GateKind kind);

// Bitwise evaluation of one gate over 64 positions. STATE is passed through.
std::uint64_t eval_word(GateKind kind, std::span<const std::uint64_t> in);

using NetId = std::uint32_t;

struct Gate {
  std::uint32_t id = 0;
  GateKind kind = GateKind::Buff;
  std::vector<NetId> inputs;
  NetId output = 0;
};

struct PrimaryInput {
  NetId net = 0;
  std::optional<std::uint64_t> lineage;
  std::optional<double> constant;  // fixed probability; variables leave this empty
  std::string bus;                 // non-empty for bus bits
  std::uint32_t bus_bit = 0;
};

// Boundary annotation of one arithmetic operation inside a netlist.
struct ArithOp {
  std::string label;
  std::string kind;
  std::vector<NetId> inputs;
  NetId output = 0;
};

class Netlist {
 public:
  NetId add_net(std::string name);
  NetId find_or_add_net(std::string_view name);
  void rename_net(NetId net, std::string name);
  std::optional<NetId> find_net(std::string_view name) const;
  NetId net(std::string_view name) const;
  const std::string& net_name(NetId net) const { return names_.at(net); }
  std::size_t net_count() const { return names_.size(); }

  NetId add_input(std::string_view name, std::optional<std::uint64_t> lineage = std::nullopt);
  std::vector<NetId> add_input_bus(std::string_view name, std::size_t width,
                                   std::optional<std::uint64_t> lineage = std::nullopt);
  // One bit of a bus; the net is named `bus[bit]`.
  NetId add_bus_bit(std::string_view bus, std::uint32_t bit, std::optional<std::uint64_t> lineage = std::nullopt);
  NetId add_constant(std::string_view name, double probability, std::optional<std::uint64_t> lineage = std::nullopt);
  void add_output(NetId net);

  std::uint32_t add_gate(GateKind kind, std::vector<NetId> inputs, NetId output,
                         std::optional<std::uint32_t> id = std::nullopt);
  // Creates the output net and its driving gate; returns the net.
  NetId emit(GateKind kind, std::vector<NetId> inputs, std::string_view output_name);
  void add_op(ArithOp op);

  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<PrimaryInput>& inputs() const { return inputs_; }
  const std::vector<NetId>& outputs() const { return outputs_; }
  const std::vector<ArithOp>& ops() const { return ops_; }

  // Index into gates() of the driver of a net.
  std::optional<std::size_t> driver(NetId net) const;
  const PrimaryInput* input_info(NetId net) const;
  bool has_state() const;

  // Throws NetlistError on dangling nets, undriven outputs or arity problems.
  void validate() const;

  // Structural equality by net names.
  bool operator==(const Netlist& other) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NetId> index_;
  std::vector<Gate> gates_;
  std::vector<PrimaryInput> inputs_;
  std::vector<NetId> outputs_;
  std::vector<ArithOp> ops_;
  std::vector<std::int64_t> driver_;     // gate index, -1 when undriven
  std::vector<std::int64_t> input_slot_; // index into inputs_, -1 otherwise
  std::uint32_t next_gate_id_ = 1;
};

Netlist parse_netlist(std::string_view text);
std::string print_netlist(const Netlist& netlist);

struct Levelization {
  std::vector<std::size_t> order;    // gate indices in topological order
  std::size_t depth = 0;
  std::vector<std::size_t> asap;     // earliest layer, 1-based
  std::vector<std::size_t> inverse;  // longest distance to a primary output or sink
  std::vector<std::size_t> layer;    // as-late-as-possible layer: depth - inverse
};

// Feedback edges into STATE gates are excluded. Throws CycleError on a combinational cycle.
Levelization topo_layers(const Netlist& netlist);

Netlist lower_to_primitives(const Netlist& netlist);

}  // namespace stochimc
