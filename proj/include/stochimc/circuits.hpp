#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stochimc/functional.hpp"
#include "stochimc/netlist.hpp"

namespace stochimc {

enum class StochasticOp { ScaledAdd, Mult, AbsSub, ScaledDiv, Sqrt, Exp };

std::string_view to_string(StochasticOp op);
std::optional<StochasticOp> parse_stochastic_op(std::string_view text);

// Square root is approximated by the degree-2 Bernstein polynomial
// C1 (1-x)^2 + 2 C2 x (1-x) + x^2 with minimax-fitted coefficients.
struct SqrtFit {
  static constexpr double c1 = 0.0718;
  static constexpr double c2 = 0.9805;
  static constexpr double max_error = 0.0720;
};

double sqrt_polynomial(double x);

// 1 - cx + (cx)^2/2 - ... - (cx)^5/120
double exp_maclaurin5(double c, double x);

// Emits primitive gates only and records an ArithOp annotation per operation.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::string prefix = {});

  NetId input(std::string_view name, std::optional<std::uint64_t> lineage = std::nullopt);
  NetId constant(std::string_view name, double probability, std::optional<std::uint64_t> lineage = std::nullopt);
  // Marks a primary output, optionally renaming its net.
  void output(NetId net, std::optional<std::string> name = std::nullopt);

  NetId mult(NetId a, NetId b);
  // MUX(select; a, b): a·s + b·(1-s).
  NetId weighted_sum(NetId select, NetId a, NetId b);
  NetId scaled_add(NetId a, NetId b, NetId half) { return weighted_sum(half, a, b); }
  NetId complement(NetId a);
  // OR of streams that are never 1 at the same position.
  NetId disjoint_add(NetId a, NetId b);
  // |a - b| for shared-lineage inputs.
  NetId abs_sub(NetId a, NetId b);
  // a / b for shared-lineage inputs with a a bitwise subset of b.
  NetId scaled_div(NetId a, NetId b);
  // sqrt from two independent copies of the same value and the two fit constants.
  NetId sqrt(NetId copy1, NetId copy2, NetId c1, NetId c2);
  // e^{-c a} from five independent copies of a; creates its own coefficient constants.
  NetId exp(std::span<const NetId> copies, double c);
  // Uniform-select multiplexer average of the inputs; creates its own select constants.
  NetId mux_average(std::span<const NetId> inputs);

  Netlist& netlist() { return nl_; }
  Netlist take();

 private:
  std::string fresh(std::string_view hint);
  std::string op_label(std::string_view kind);
  NetId mux(NetId select, NetId a, NetId b, std::string_view hint);
  NetId average_tree(std::span<const NetId> inputs, const std::string& label);
  void annotate(std::string_view kind, const std::string& label, std::vector<NetId> inputs, NetId out);

  std::string prefix_;
  Netlist nl_;
  std::size_t counter_ = 0;
  std::size_t op_counter_ = 0;
};

// Single-op netlist with output net "y". Inputs are named by op_input_names().
Netlist build_stochastic_circuit(StochasticOp op, double exp_c = 0.8);

// Primary-input values for an op given its operand values.
InputValues op_input_values(StochasticOp op, double a, double b = 0.0);

// Analytic target of the op (the Bernstein polynomial for Sqrt, the Maclaurin truncation for Exp).
double op_target(StochasticOp op, double a, double b = 0.0, double exp_c = 0.8);

// Ripple-carry adder mapped one bit per row block. Odd rows store complemented operands and
// even rows produce complemented sums, which removes every polarity-restoring NOT.
struct BinaryAdder {
  Netlist netlist;
  std::size_t width = 0;
  std::vector<bool> operand_inverted;  // per bit: operands written complemented
  std::vector<bool> sum_inverted;      // per bit: sum read complemented
  std::vector<NetId> sum;              // per bit
};

BinaryAdder build_binary_adder(std::size_t n_bits);

// Length-1 input streams for a + b + carry_in.
StreamMap adder_inputs(const BinaryAdder& adder, std::uint64_t a, std::uint64_t b, bool carry_in = false);
std::uint64_t adder_result(const BinaryAdder& adder, const StreamMap& outputs);

}  // namespace stochimc
