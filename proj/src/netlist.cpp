#include "stochimc/netlist.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <functional>
#include <sstream>

#include "stochimc/errors.hpp"

namespace stochimc {

namespace {

constexpr std::array<std::string_view, kGateKindCount> kKindNames = {
    "BUFF", "NOT", "AND", "NAND", "OR", "NOR", "MAJ3B", "MAJ5B", "STATE", "XOR", "MUX"};

constexpr std::array<std::size_t, kGateKindCount> kArity = {1, 1, 2, 2, 2, 2, 3, 5, 1, 2, 3};

std::uint64_t maj3(std::uint64_t a, std::uint64_t b, std::uint64_t c) { return (a & b) | (a & c) | (b & c); }

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

}  // namespace

std::string_view to_string(GateKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<GateKind> parse_gate_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == text) return static_cast<GateKind>(i);
  if (text == "INV") return GateKind::Not;
  return std::nullopt;
}

std::size_t arity(GateKind kind) { return kArity[static_cast<std::size_t>(kind)]; }

bool is_primitive(GateKind kind) { return kind != GateKind::Xor && kind != GateKind::Mux; }

std::uint64_t eval_word(GateKind kind, std::span<const std::uint64_t> in) {
  switch (kind) {
    case GateKind::Buff:
    case GateKind::State: return in[0];
    case GateKind::Not: return ~in[0];
    case GateKind::And: return in[0] & in[1];
    case GateKind::Nand: return ~(in[0] & in[1]);
    case GateKind::Or: return in[0] | in[1];
    case GateKind::Nor: return ~(in[0] | in[1]);
    case GateKind::Maj3b: return ~maj3(in[0], in[1], in[2]);
    case GateKind::Maj5b: {
      // Bit-sliced count of five inputs; majority means count >= 3.
      std::uint64_t s0 = in[0] ^ in[1] ^ in[2];
      std::uint64_t c0 = maj3(in[0], in[1], in[2]);
      std::uint64_t s1 = s0 ^ in[3] ^ in[4];
      std::uint64_t c1 = maj3(s0, in[3], in[4]);
      return ~((c0 & c1) | ((c0 | c1) & s1));
    }
    case GateKind::Xor: return in[0] ^ in[1];
    case GateKind::Mux: return (in[0] & in[1]) | (~in[0] & in[2]);
  }
  return 0;
}

NetId Netlist::add_net(std::string name) {
  if (index_.contains(name)) throw NetlistError(NetlistIssue::Duplicate, "net '" + name + "' already exists");
  auto id = static_cast<NetId>(names_.size());
  index_.emplace(name, id);
  names_.push_back(std::move(name));
  driver_.push_back(-1);
  input_slot_.push_back(-1);
  return id;
}

void Netlist::rename_net(NetId net, std::string name) {
  if (names_.at(net) == name) return;
  if (index_.contains(name)) throw NetlistError(NetlistIssue::Duplicate, "net '" + name + "' already exists");
  index_.erase(names_[net]);
  index_.emplace(name, net);
  names_[net] = std::move(name);
}

NetId Netlist::find_or_add_net(std::string_view name) {
  if (auto found = find_net(name)) return *found;
  return add_net(std::string(name));
}

std::optional<NetId> Netlist::find_net(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NetId Netlist::net(std::string_view name) const {
  if (auto found = find_net(name)) return *found;
  throw NetlistError(NetlistIssue::UnknownNet, "unknown net '" + std::string(name) + "'");
}

NetId Netlist::add_input(std::string_view name, std::optional<std::uint64_t> lineage) {
  NetId id = find_or_add_net(name);
  if (input_slot_[id] >= 0 || driver_[id] >= 0)
    throw NetlistError(NetlistIssue::MultipleDrivers, "net '" + std::string(name) + "' is already driven");
  input_slot_[id] = static_cast<std::int64_t>(inputs_.size());
  inputs_.push_back({id, lineage, std::nullopt, {}, 0});
  return id;
}

std::vector<NetId> Netlist::add_input_bus(std::string_view name, std::size_t width,
                                          std::optional<std::uint64_t> lineage) {
  std::vector<NetId> bits;
  for (std::size_t i = 0; i < width; ++i) bits.push_back(add_bus_bit(name, static_cast<std::uint32_t>(i), lineage));
  return bits;
}

NetId Netlist::add_bus_bit(std::string_view bus, std::uint32_t bit, std::optional<std::uint64_t> lineage) {
  NetId id = add_input(std::string(bus) + "[" + std::to_string(bit) + "]", lineage);
  inputs_.back().bus = std::string(bus);
  inputs_.back().bus_bit = bit;
  return id;
}

NetId Netlist::add_constant(std::string_view name, double probability, std::optional<std::uint64_t> lineage) {
  if (!(probability >= 0.0 && probability <= 1.0))
    throw DomainError("constant '" + std::string(name) + "' probability outside [0,1]");
  NetId id = add_input(name, lineage);
  inputs_.back().constant = probability;
  return id;
}

void Netlist::add_output(NetId net) {
  if (std::find(outputs_.begin(), outputs_.end(), net) != outputs_.end())
    throw NetlistError(NetlistIssue::Duplicate, "net '" + names_.at(net) + "' is already an output");
  outputs_.push_back(net);
}

std::uint32_t Netlist::add_gate(GateKind kind, std::vector<NetId> inputs, NetId output,
                                std::optional<std::uint32_t> id) {
  if (inputs.size() != arity(kind))
    throw NetlistError(NetlistIssue::ArityMismatch, std::string(to_string(kind)) + " expects " +
                                                        std::to_string(arity(kind)) + " inputs, got " +
                                                        std::to_string(inputs.size()));
  if (output >= names_.size()) throw NetlistError(NetlistIssue::UnknownNet, "output net id out of range");
  for (NetId in : inputs)
    if (in >= names_.size()) throw NetlistError(NetlistIssue::UnknownNet, "input net id out of range");
  if (driver_[output] >= 0 || input_slot_[output] >= 0)
    throw NetlistError(NetlistIssue::MultipleDrivers, "net '" + names_[output] + "' has multiple drivers");
  std::uint32_t gate_id = id.value_or(next_gate_id_);
  next_gate_id_ = std::max(next_gate_id_, gate_id + 1);
  driver_[output] = static_cast<std::int64_t>(gates_.size());
  gates_.push_back({gate_id, kind, std::move(inputs), output});
  return gate_id;
}

NetId Netlist::emit(GateKind kind, std::vector<NetId> inputs, std::string_view output_name) {
  NetId out = add_net(std::string(output_name));
  add_gate(kind, std::move(inputs), out);
  return out;
}

void Netlist::add_op(ArithOp op) { ops_.push_back(std::move(op)); }

std::optional<std::size_t> Netlist::driver(NetId net) const {
  if (net >= driver_.size() || driver_[net] < 0) return std::nullopt;
  return static_cast<std::size_t>(driver_[net]);
}

const PrimaryInput* Netlist::input_info(NetId net) const {
  if (net >= input_slot_.size() || input_slot_[net] < 0) return nullptr;
  return &inputs_[static_cast<std::size_t>(input_slot_[net])];
}

bool Netlist::has_state() const {
  return std::any_of(gates_.begin(), gates_.end(), [](const Gate& g) { return g.kind == GateKind::State; });
}

void Netlist::validate() const {
  auto sourced = [this](NetId n) { return driver_[n] >= 0 || input_slot_[n] >= 0; };
  for (const auto& g : gates_) {
    if (g.inputs.size() != arity(g.kind))
      throw NetlistError(NetlistIssue::ArityMismatch, "gate " + std::to_string(g.id) + " arity mismatch");
    for (NetId in : g.inputs)
      if (!sourced(in)) throw NetlistError(NetlistIssue::DanglingNet, "net '" + names_[in] + "' is never driven");
  }
  for (NetId out : outputs_)
    if (!sourced(out)) throw NetlistError(NetlistIssue::DanglingNet, "output '" + names_[out] + "' is never driven");
  for (const auto& op : ops_) {
    for (NetId in : op.inputs)
      if (!sourced(in)) throw NetlistError(NetlistIssue::DanglingNet, "op '" + op.label + "' reads undriven net");
    if (!sourced(op.output)) throw NetlistError(NetlistIssue::DanglingNet, "op '" + op.label + "' output undriven");
  }
}

bool Netlist::operator==(const Netlist& other) const {
  auto names_of = [](const Netlist& nl, const std::vector<NetId>& nets) {
    std::vector<std::string> out;
    for (NetId n : nets) out.push_back(nl.net_name(n));
    return out;
  };
  if (gates_.size() != other.gates_.size() || inputs_.size() != other.inputs_.size() ||
      outputs_.size() != other.outputs_.size() || ops_.size() != other.ops_.size())
    return false;
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    const auto& a = gates_[i];
    const auto& b = other.gates_[i];
    if (a.id != b.id || a.kind != b.kind || net_name(a.output) != other.net_name(b.output) ||
        names_of(*this, a.inputs) != names_of(other, b.inputs))
      return false;
  }
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    const auto& a = inputs_[i];
    const auto& b = other.inputs_[i];
    if (net_name(a.net) != other.net_name(b.net) || a.lineage != b.lineage || a.constant != b.constant ||
        a.bus != b.bus || a.bus_bit != b.bus_bit)
      return false;
  }
  if (names_of(*this, outputs_) != names_of(other, other.outputs_)) return false;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const auto& a = ops_[i];
    const auto& b = other.ops_[i];
    if (a.label != b.label || a.kind != b.kind || net_name(a.output) != other.net_name(b.output) ||
        names_of(*this, a.inputs) != names_of(other, b.inputs))
      return false;
  }
  return true;
}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

struct NetUse {
  std::size_t line;
  std::size_t column;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Netlist run() {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      std::size_t end = text_.find('\n', pos);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos, end - pos);
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      auto tokens = tokenize(line);
      if (!tokens.empty()) parse_line(tokens, line_no);
      pos = end + 1;
    }
    for (const auto& [net, use] : first_use_) {
      if (!nl_.driver(net) && !nl_.input_info(net))
        throw NetlistError(NetlistIssue::DanglingNet, "net '" + nl_.net_name(net) + "' is never driven", use.line,
                           use.column);
    }
    nl_.validate();
    return std::move(nl_);
  }

 private:
  [[noreturn]] void fail(NetlistIssue issue, const std::string& msg, std::size_t line, std::size_t col) {
    throw NetlistError(issue, msg, line, col);
  }

  NetId use_net(std::string_view name, std::size_t line, std::size_t col) {
    if (name.empty()) fail(NetlistIssue::Syntax, "empty net name", line, col);
    NetId id = nl_.find_or_add_net(name);
    first_use_.try_emplace(id, NetUse{line, col});
    return id;
  }

  std::vector<NetId> net_list(const Token& tok, std::size_t line) {
    std::vector<NetId> nets;
    std::size_t start = 0;
    while (start <= tok.text.size()) {
      std::size_t comma = tok.text.find(',', start);
      if (comma == std::string_view::npos) comma = tok.text.size();
      nets.push_back(use_net(tok.text.substr(start, comma - start), line, tok.column + start));
      start = comma + 1;
    }
    return nets;
  }

  std::optional<std::uint64_t> parse_lineage(std::span<const Token> attrs, std::size_t line,
                                             std::optional<double>* probability) {
    std::optional<std::uint64_t> lineage;
    for (const auto& a : attrs) {
      if (a.text.starts_with("lineage=")) {
        lineage = parse_number<std::uint64_t>(a.text.substr(8));
        if (!lineage) fail(NetlistIssue::Syntax, "bad lineage value", line, a.column + 8);
      } else if (probability && a.text.starts_with("p=")) {
        *probability = parse_number<double>(a.text.substr(2));
        if (!*probability) fail(NetlistIssue::Syntax, "bad probability value", line, a.column + 2);
      } else {
        fail(NetlistIssue::Syntax, "unexpected attribute '" + std::string(a.text) + "'", line, a.column);
      }
    }
    return lineage;
  }

  void declare_input(const Token& name_tok, std::size_t line, std::optional<std::uint64_t> lineage) {
    std::string_view name = name_tok.text;
    try {
      auto open = name.find('[');
      if (open != std::string_view::npos && name.back() == ']') {
        auto width = parse_number<std::size_t>(name.substr(open + 1, name.size() - open - 2));
        if (!width || *width == 0) fail(NetlistIssue::Syntax, "bad bus width", line, name_tok.column + open + 1);
        nl_.add_input_bus(name.substr(0, open), *width, lineage);
      } else {
        nl_.add_input(name, lineage);
      }
    } catch (const NetlistError& e) {
      if (e.line != 0) throw;
      fail(e.issue, e.what(), line, name_tok.column);
    }
  }

  void parse_line(const std::vector<Token>& t, std::size_t line) {
    std::string_view head = t[0].text;
    if (head == "PI") {
      if (t.size() < 2) fail(NetlistIssue::Syntax, "PI needs a net name", line, t[0].column);
      auto lineage = parse_lineage(std::span(t).subspan(2), line, nullptr);
      declare_input(t[1], line, lineage);
    } else if (head == "CONST") {
      if (t.size() < 3) fail(NetlistIssue::Syntax, "CONST needs a name and p=<value>", line, t[0].column);
      std::optional<double> p;
      auto lineage = parse_lineage(std::span(t).subspan(2), line, &p);
      if (!p) fail(NetlistIssue::Syntax, "CONST without p=<value>", line, t[1].column);
      try {
        nl_.add_constant(t[1].text, *p, lineage);
      } catch (const NetlistError& e) {
        fail(e.issue, e.what(), line, t[1].column);
      } catch (const DomainError& e) {
        fail(NetlistIssue::Syntax, e.what(), line, t[2].column);
      }
    } else if (head == "PO") {
      if (t.size() != 2) fail(NetlistIssue::Syntax, "PO takes exactly one net", line, t[0].column);
      try {
        nl_.add_output(use_net(t[1].text, line, t[1].column));
      } catch (const NetlistError& e) {
        fail(e.issue, e.what(), line, t[1].column);
      }
    } else if (head == "OP") {
      if (t.size() != 6 || t[4].text != "->")
        fail(NetlistIssue::Syntax, "expected 'OP <label> <kind> <in,...> -> <out>'", line, t[0].column);
      ArithOp op{std::string(t[1].text), std::string(t[2].text), net_list(t[3], line),
                 use_net(t[5].text, line, t[5].column)};
      nl_.add_op(std::move(op));
    } else {
      auto id = parse_number<std::uint32_t>(head);
      if (!id) fail(NetlistIssue::Syntax, "unknown declaration '" + std::string(head) + "'", line, t[0].column);
      if (t.size() != 5 || t[3].text != "->")
        fail(NetlistIssue::Syntax, "expected '<id> <KIND> <in,...> -> <out>'", line, t[0].column);
      auto kind = parse_gate_kind(t[1].text);
      if (!kind) fail(NetlistIssue::UnknownKind, "unknown gate kind '" + std::string(t[1].text) + "'", line, t[1].column);
      auto ins = net_list(t[2], line);
      if (ins.size() != arity(*kind))
        fail(NetlistIssue::ArityMismatch,
             std::string(t[1].text) + " expects " + std::to_string(arity(*kind)) + " inputs, got " +
                 std::to_string(ins.size()),
             line, t[2].column);
      NetId out = use_net(t[4].text, line, t[4].column);
      try {
        nl_.add_gate(*kind, std::move(ins), out, *id);
      } catch (const NetlistError& e) {
        fail(e.issue, e.what(), line, t[4].column);
      }
    }
  }

  std::string_view text_;
  Netlist nl_;
  std::unordered_map<NetId, NetUse> first_use_;
};

std::string join_names(const Netlist& nl, const std::vector<NetId>& nets) {
  std::string out;
  for (std::size_t i = 0; i < nets.size(); ++i) {
    if (i) out += ',';
    out += nl.net_name(nets[i]);
  }
  return out;
}

}  // namespace

Netlist parse_netlist(std::string_view text) { return Parser(text).run(); }

std::string print_netlist(const Netlist& netlist) {
  std::ostringstream out;
  const auto& inputs = netlist.inputs();
  for (std::size_t i = 0; i < inputs.size();) {
    const auto& pi = inputs[i];
    std::string lineage = pi.lineage ? " lineage=" + std::to_string(*pi.lineage) : "";
    if (!pi.bus.empty()) {
      std::size_t width = 0;
      while (i + width < inputs.size() && inputs[i + width].bus == pi.bus && inputs[i + width].bus_bit == width)
        ++width;
      out << "PI " << pi.bus << '[' << width << ']' << lineage << '\n';
      i += width;
      continue;
    }
    if (pi.constant)
      out << "CONST " << netlist.net_name(pi.net) << " p=" << format_double(*pi.constant) << lineage << '\n';
    else
      out << "PI " << netlist.net_name(pi.net) << lineage << '\n';
    ++i;
  }
  for (const auto& g : netlist.gates())
    out << g.id << ' ' << to_string(g.kind) << ' ' << join_names(netlist, g.inputs) << " -> "
        << netlist.net_name(g.output) << '\n';
  for (NetId po : netlist.outputs()) out << "PO " << netlist.net_name(po) << '\n';
  for (const auto& op : netlist.ops())
    out << "OP " << op.label << ' ' << op.kind << ' ' << join_names(netlist, op.inputs) << " -> "
        << netlist.net_name(op.output) << '\n';
  return out.str();
}

Levelization topo_layers(const Netlist& netlist) {
  const auto& gates = netlist.gates();
  const std::size_t n = gates.size();
  std::vector<std::vector<std::size_t>> fanout(n);
  std::vector<std::size_t> pending(n, 0);
  for (std::size_t g = 0; g < n; ++g) {
    if (gates[g].kind == GateKind::State) continue;
    for (NetId in : gates[g].inputs) {
      if (auto d = netlist.driver(in)) {
        fanout[*d].push_back(g);
        ++pending[g];
      }
    }
  }
  Levelization lv;
  lv.asap.assign(n, 1);
  std::vector<std::size_t> ready;
  for (std::size_t g = n; g-- > 0;)
    if (pending[g] == 0) ready.push_back(g);
  while (!ready.empty()) {
    std::size_t g = ready.back();
    ready.pop_back();
    lv.order.push_back(g);
    for (std::size_t c : fanout[g]) {
      lv.asap[c] = std::max(lv.asap[c], lv.asap[g] + 1);
      if (--pending[c] == 0) ready.push_back(c);
    }
  }
  if (lv.order.size() != n) {
    // Walk fan-in edges among unprocessed gates until a gate repeats.
    std::size_t g = 0;
    while (pending[g] == 0) ++g;
    std::vector<std::size_t> path;
    std::vector<std::int64_t> seen(n, -1);
    while (seen[g] < 0) {
      seen[g] = static_cast<std::int64_t>(path.size());
      path.push_back(g);
      for (NetId in : gates[g].inputs) {
        auto d = netlist.driver(in);
        if (d && pending[*d] > 0) {
          g = *d;
          break;
        }
      }
    }
    std::string listing;
    for (auto i = static_cast<std::size_t>(seen[g]); i < path.size(); ++i)
      listing += (listing.empty() ? "" : " <- ") + std::to_string(gates[path[i]].id);
    throw CycleError("combinational cycle through gates " + listing);
  }
  lv.inverse.assign(n, 0);
  for (auto it = lv.order.rbegin(); it != lv.order.rend(); ++it)
    for (std::size_t c : fanout[*it]) lv.inverse[*it] = std::max(lv.inverse[*it], lv.inverse[c] + 1);
  for (std::size_t g = 0; g < n; ++g) lv.depth = std::max(lv.depth, lv.asap[g]);
  lv.layer.resize(n);
  for (std::size_t g = 0; g < n; ++g) lv.layer[g] = lv.depth - lv.inverse[g];
  return lv;
}

Netlist lower_to_primitives(const Netlist& netlist) {
  Netlist out;
  for (NetId i = 0; i < netlist.net_count(); ++i) out.add_net(netlist.net_name(i));
  for (const auto& pi : netlist.inputs()) {
    if (!pi.bus.empty()) {
      out.add_bus_bit(pi.bus, pi.bus_bit, pi.lineage);
    } else if (pi.constant) {
      out.add_constant(netlist.net_name(pi.net), *pi.constant, pi.lineage);
    } else {
      out.add_input(netlist.net_name(pi.net), pi.lineage);
    }
  }
  std::uint32_t next_id = 1;
  for (const auto& g : netlist.gates()) next_id = std::max(next_id, g.id + 1);
  for (const auto& g : netlist.gates()) {
    const std::string& y = netlist.net_name(g.output);
    auto fresh = [&](GateKind kind, std::vector<NetId> ins, const std::string& suffix) {
      NetId net = out.add_net(y + "$" + suffix);
      out.add_gate(kind, std::move(ins), net, next_id++);
      return net;
    };
    if (g.kind == GateKind::Xor) {
      NetId a = g.inputs[0], b = g.inputs[1];
      NetId na = fresh(GateKind::Not, {a}, "na");
      NetId nb = fresh(GateKind::Not, {b}, "nb");
      NetId t1 = fresh(GateKind::And, {a, nb}, "t1");
      NetId t2 = fresh(GateKind::And, {na, b}, "t2");
      out.add_gate(GateKind::Or, {t1, t2}, g.output, g.id);
    } else if (g.kind == GateKind::Mux) {
      NetId s = g.inputs[0], a = g.inputs[1], b = g.inputs[2];
      NetId ns = fresh(GateKind::Not, {s}, "ns");
      NetId t1 = fresh(GateKind::And, {a, s}, "t1");
      NetId t2 = fresh(GateKind::And, {b, ns}, "t2");
      out.add_gate(GateKind::Or, {t1, t2}, g.output, g.id);
    } else {
      out.add_gate(g.kind, g.inputs, g.output, g.id);
    }
  }
  for (NetId po : netlist.outputs()) out.add_output(po);
  for (const auto& op : netlist.ops()) out.add_op(op);
  return out;
}

}  // namespace stochimc
