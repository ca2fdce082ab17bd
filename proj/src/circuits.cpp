#include "stochimc/circuits.hpp"

#include <array>
#include <cmath>

#include "stochimc/errors.hpp"

namespace stochimc {

namespace {

constexpr std::array<std::string_view, 6> kOpNames = {"scaled-add", "mult", "abs-sub", "scaled-div", "sqrt", "exp"};

}  // namespace

std::string_view to_string(StochasticOp op) { return kOpNames[static_cast<std::size_t>(op)]; }

std::optional<StochasticOp> parse_stochastic_op(std::string_view text) {
  for (std::size_t i = 0; i < kOpNames.size(); ++i)
    if (kOpNames[i] == text) return static_cast<StochasticOp>(i);
  if (text == "add") return StochasticOp::ScaledAdd;
  if (text == "sub") return StochasticOp::AbsSub;
  if (text == "div") return StochasticOp::ScaledDiv;
  return std::nullopt;
}

double sqrt_polynomial(double x) {
  double y = 1.0 - x;
  return SqrtFit::c1 * y * y + 2.0 * SqrtFit::c2 * x * y + x * x;
}

double exp_maclaurin5(double c, double x) {
  double t = c * x;
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k <= 5; ++k) {
    term *= -t / k;
    sum += term;
  }
  return sum;
}

CircuitBuilder::CircuitBuilder(std::string prefix) : prefix_(std::move(prefix)) {}

std::string CircuitBuilder::fresh(std::string_view hint) {
  return prefix_ + std::string(hint) + "." + std::to_string(counter_++);
}

std::string CircuitBuilder::op_label(std::string_view kind) {
  return prefix_ + std::string(kind) + std::to_string(op_counter_++);
}

void CircuitBuilder::annotate(std::string_view kind, const std::string& label, std::vector<NetId> inputs, NetId out) {
  nl_.add_op({label, std::string(kind), std::move(inputs), out});
}

NetId CircuitBuilder::input(std::string_view name, std::optional<std::uint64_t> lineage) {
  return nl_.add_input(prefix_ + std::string(name), lineage);
}

NetId CircuitBuilder::constant(std::string_view name, double probability, std::optional<std::uint64_t> lineage) {
  return nl_.add_constant(prefix_ + std::string(name), probability, lineage);
}

void CircuitBuilder::output(NetId net, std::optional<std::string> name) {
  if (name) nl_.rename_net(net, prefix_ + *name);
  nl_.add_output(net);
}

NetId CircuitBuilder::mux(NetId select, NetId a, NetId b, std::string_view hint) {
  NetId ns = nl_.emit(GateKind::Not, {select}, fresh(std::string(hint) + ".ns"));
  NetId t1 = nl_.emit(GateKind::And, {a, select}, fresh(std::string(hint) + ".ta"));
  NetId t2 = nl_.emit(GateKind::And, {b, ns}, fresh(std::string(hint) + ".tb"));
  return nl_.emit(GateKind::Or, {t1, t2}, fresh(hint));
}

NetId CircuitBuilder::mult(NetId a, NetId b) {
  auto label = op_label("mult");
  NetId y = nl_.emit(GateKind::And, {a, b}, fresh("mult"));
  annotate("Mult", label, {a, b}, y);
  return y;
}

NetId CircuitBuilder::weighted_sum(NetId select, NetId a, NetId b) {
  auto label = op_label("wsum");
  NetId y = mux(select, a, b, "wsum");
  annotate("WeightedSum", label, {select, a, b}, y);
  return y;
}

NetId CircuitBuilder::complement(NetId a) {
  auto label = op_label("not");
  NetId y = nl_.emit(GateKind::Not, {a}, fresh("not"));
  annotate("Complement", label, {a}, y);
  return y;
}

NetId CircuitBuilder::disjoint_add(NetId a, NetId b) {
  auto label = op_label("add");
  NetId y = nl_.emit(GateKind::Or, {a, b}, fresh("add"));
  annotate("DisjointAdd", label, {a, b}, y);
  return y;
}

NetId CircuitBuilder::abs_sub(NetId a, NetId b) {
  auto label = op_label("abssub");
  NetId na = nl_.emit(GateKind::Not, {a}, fresh("abssub.na"));
  NetId nb = nl_.emit(GateKind::Not, {b}, fresh("abssub.nb"));
  NetId t1 = nl_.emit(GateKind::And, {a, nb}, fresh("abssub.t1"));
  NetId t2 = nl_.emit(GateKind::And, {na, b}, fresh("abssub.t2"));
  NetId y = nl_.emit(GateKind::Or, {t1, t2}, fresh("abssub"));
  annotate("AbsSub", label, {a, b}, y);
  return y;
}

NetId CircuitBuilder::scaled_div(NetId a, NetId b) {
  // y = B ? A : Q, with Q latching y after every position.
  auto label = op_label("div");
  NetId y = nl_.add_net(fresh("div"));
  NetId q = nl_.emit(GateKind::State, {y}, fresh("div.q"));
  NetId nb = nl_.emit(GateKind::Not, {b}, fresh("div.nb"));
  NetId t1 = nl_.emit(GateKind::And, {a, b}, fresh("div.ta"));
  NetId t2 = nl_.emit(GateKind::And, {q, nb}, fresh("div.tq"));
  nl_.add_gate(GateKind::Or, {t1, t2}, y);
  annotate("ScaledDiv", label, {a, b}, y);
  return y;
}

NetId CircuitBuilder::sqrt(NetId copy1, NetId copy2, NetId c1, NetId c2) {
  // both copies 1 -> 1; exactly one -> C2; none -> C1
  auto label = op_label("sqrt");
  NetId both = nl_.emit(GateKind::And, {copy1, copy2}, fresh("sqrt.both"));
  NetId any = nl_.emit(GateKind::Or, {copy1, copy2}, fresh("sqrt.any"));
  NetId pick = mux(any, c2, c1, "sqrt.pick");
  NetId y = nl_.emit(GateKind::Or, {both, pick}, fresh("sqrt"));
  annotate("Sqrt", label, {copy1, copy2, c1, c2}, y);
  return y;
}

NetId CircuitBuilder::exp(std::span<const NetId> copies, double c) {
  if (!(c > 0.0 && c <= 1.0)) throw DomainError("exp coefficient must satisfy 0 < c <= 1");
  if (copies.size() != 5) throw DomainError("exp needs five independent input copies");
  auto label = op_label("exp");
  std::vector<NetId> coeff(6);
  for (int k = 1; k <= 5; ++k)
    coeff[static_cast<std::size_t>(k)] = nl_.add_constant(label + ".k" + std::to_string(k), c / k);
  // Horner: y5 = 1 - (c/5)a, y_k = 1 - (c/k) a y_{k+1}
  NetId y = nl_.emit(GateKind::Nand, {coeff[5], copies[4]}, fresh("exp.h5"));
  for (int k = 4; k >= 1; --k) {
    NetId t = nl_.emit(GateKind::And, {coeff[static_cast<std::size_t>(k)], copies[static_cast<std::size_t>(k - 1)]},
                       fresh("exp.t" + std::to_string(k)));
    y = nl_.emit(GateKind::Nand, {t, y}, fresh(k == 1 ? "exp" : "exp.h" + std::to_string(k)));
  }
  std::vector<NetId> ins(copies.begin(), copies.end());
  annotate("Exp", label, std::move(ins), y);
  return y;
}

NetId CircuitBuilder::average_tree(std::span<const NetId> inputs, const std::string& label) {
  if (inputs.size() == 1) return inputs[0];
  std::size_t left = (inputs.size() + 1) / 2;
  NetId l = average_tree(inputs.subspan(0, left), label);
  NetId r = average_tree(inputs.subspan(left), label);
  double weight = static_cast<double>(left) / static_cast<double>(inputs.size());
  NetId select = nl_.add_constant(label + ".s" + std::to_string(counter_++), weight);
  return mux(select, l, r, "avg");
}

NetId CircuitBuilder::mux_average(std::span<const NetId> inputs) {
  if (inputs.empty()) throw DomainError("average over no inputs");
  auto label = op_label("avg");
  NetId y = average_tree(inputs, label);
  annotate("Average", label, std::vector<NetId>(inputs.begin(), inputs.end()), y);
  return y;
}

Netlist CircuitBuilder::take() {
  nl_.validate();
  return std::move(nl_);
}

Netlist build_stochastic_circuit(StochasticOp op, double exp_c) {
  CircuitBuilder b;
  NetId y = 0;
  switch (op) {
    case StochasticOp::ScaledAdd: {
      NetId a = b.input("a");
      NetId x = b.input("b");
      NetId s = b.constant("s", 0.5);
      y = b.scaled_add(a, x, s);
      break;
    }
    case StochasticOp::Mult: {
      NetId a = b.input("a");
      NetId x = b.input("b");
      y = b.mult(a, x);
      break;
    }
    case StochasticOp::AbsSub: {
      NetId a = b.input("a", 1);
      NetId x = b.input("b", 1);
      y = b.abs_sub(a, x);
      break;
    }
    case StochasticOp::ScaledDiv: {
      NetId a = b.input("a", 1);
      NetId x = b.input("b", 1);
      y = b.scaled_div(a, x);
      break;
    }
    case StochasticOp::Sqrt: {
      NetId a1 = b.input("a1");
      NetId a2 = b.input("a2");
      NetId c1 = b.constant("c1", SqrtFit::c1);
      NetId c2 = b.constant("c2", SqrtFit::c2);
      y = b.sqrt(a1, a2, c1, c2);
      break;
    }
    case StochasticOp::Exp: {
      if (!(exp_c > 0.0 && exp_c <= 1.0)) throw DomainError("exp coefficient must satisfy 0 < c <= 1");
      std::array<NetId, 5> copies{};
      for (std::size_t i = 0; i < copies.size(); ++i) copies[i] = b.input("a" + std::to_string(i));
      y = b.exp(copies, exp_c);
      break;
    }
  }
  b.output(y, "y");
  return b.take();
}

InputValues op_input_values(StochasticOp op, double a, double b) {
  switch (op) {
    case StochasticOp::Sqrt: return {{"a1", a}, {"a2", a}};
    case StochasticOp::Exp: return {{"a0", a}, {"a1", a}, {"a2", a}, {"a3", a}, {"a4", a}};
    default: return {{"a", a}, {"b", b}};
  }
}

double op_target(StochasticOp op, double a, double b, double exp_c) {
  switch (op) {
    case StochasticOp::ScaledAdd: return 0.5 * (a + b);
    case StochasticOp::Mult: return a * b;
    case StochasticOp::AbsSub: return std::abs(a - b);
    case StochasticOp::ScaledDiv: return b > 0.0 ? std::min(1.0, a / b) : 0.0;
    case StochasticOp::Sqrt: return sqrt_polynomial(a);
    case StochasticOp::Exp: return exp_maclaurin5(exp_c, a);
  }
  return 0.0;
}

BinaryAdder build_binary_adder(std::size_t n_bits) {
  if (n_bits < 1 || n_bits > 64) throw DomainError("adder width must be in [1,64]");
  BinaryAdder adder;
  adder.width = n_bits;
  Netlist& nl = adder.netlist;
  auto a = nl.add_input_bus("a", n_bits);
  auto b = nl.add_input_bus("b", n_bits);
  auto carry_in = nl.add_input_bus("cin", 1);
  NetId carry = carry_in[0];
  for (std::size_t i = 0; i < n_bits; ++i) {
    std::string bit = std::to_string(i);
    NetId k = nl.emit(GateKind::Maj3b, {a[i], b[i], carry}, "k" + bit);
    NetId kd = nl.emit(GateKind::Buff, {k}, "kd" + bit);
    NetId s = nl.emit(GateKind::Maj5b, {a[i], b[i], carry, k, kd}, "s" + bit);
    nl.add_output(s);
    adder.sum.push_back(s);
    adder.operand_inverted.push_back(i % 2 == 1);
    adder.sum_inverted.push_back(i % 2 == 0);
    carry = k;
  }
  nl.validate();
  return adder;
}

StreamMap adder_inputs(const BinaryAdder& adder, std::uint64_t a, std::uint64_t b, bool carry_in) {
  StreamMap streams;
  const Netlist& nl = adder.netlist;
  for (std::size_t i = 0; i < adder.width; ++i) {
    bool inv = adder.operand_inverted[i];
    streams.emplace(nl.net("a[" + std::to_string(i) + "]"), Bitstream(1, (((a >> i) & 1U) != 0) != inv));
    streams.emplace(nl.net("b[" + std::to_string(i) + "]"), Bitstream(1, (((b >> i) & 1U) != 0) != inv));
  }
  streams.emplace(nl.net("cin[0]"), Bitstream(1, carry_in));
  return streams;
}

std::uint64_t adder_result(const BinaryAdder& adder, const StreamMap& outputs) {
  std::uint64_t result = 0;
  for (std::size_t i = 0; i < adder.width; ++i) {
    bool bit = outputs.at(adder.sum[i]).get(0) != adder.sum_inverted[i];
    if (bit) result |= std::uint64_t{1} << i;
  }
  return result;
}

}  // namespace stochimc
