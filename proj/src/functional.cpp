#include "stochimc/functional.hpp"

#include <array>

#include "stochimc/errors.hpp"

namespace stochimc {

StreamMap bind_inputs(const Netlist& netlist, const InputValues& values, std::size_t length,
                      const RandomSource& source) {
  StreamMap streams;
  for (const auto& pi : netlist.inputs()) {
    const std::string& name = netlist.net_name(pi.net);
    double p = 0.0;
    if (pi.constant) {
      p = *pi.constant;
    } else {
      auto it = values.find(name);
      if (it == values.end()) throw DomainError("no value for primary input '" + name + "'");
      p = it->second;
    }
    if (pi.lineage)
      streams.emplace(pi.net, encode_unipolar(p, length, source, pi.lineage));
    else
      streams.emplace(pi.net, encode_unipolar(p, length, source.child(name)));
  }
  return streams;
}

void inject_flips(Bitstream& bs, double rate, const RandomSource& source) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw DomainError("flip rate outside [0,1]");
  if (rate == 0.0) return;
  for (std::size_t i = 0; i < bs.size(); ++i)
    if (source.uniform(i) < rate) bs.flip(i);
}

RandomSource fault_source_for(const RandomSource& base, const std::string& node) {
  return base.child("fault:" + node);
}

namespace {

void check_bound(const Netlist& netlist, const StreamMap& inputs, std::size_t& length) {
  bool first = true;
  for (const auto& pi : netlist.inputs()) {
    auto it = inputs.find(pi.net);
    if (it == inputs.end()) throw DomainError("primary input '" + netlist.net_name(pi.net) + "' is unbound");
    if (first) {
      length = it->second.size();
      first = false;
    } else if (it->second.size() != length) {
      throw DomainError("primary input streams differ in length");
    }
  }
  if (first) {
    // No inputs: take the length from any provided stream, if present.
    length = inputs.empty() ? 0 : inputs.begin()->second.size();
  }
}

}  // namespace

std::vector<Bitstream> simulate_nets(const Netlist& netlist, const StreamMap& inputs, const NetFaults* faults) {
  std::size_t length = 0;
  check_bound(netlist, inputs, length);
  const Levelization lv = topo_layers(netlist);
  const auto& gates = netlist.gates();

  std::vector<Bitstream> nets(netlist.net_count(), Bitstream(length));
  std::vector<char> targeted(netlist.net_count(), 0);
  std::vector<RandomSource> flip_src(netlist.net_count());
  if (faults && faults->rate > 0.0) {
    for (NetId n : faults->nets) {
      targeted[n] = 1;
      flip_src[n] = fault_source_for(faults->source, netlist.net_name(n));
    }
  }
  for (const auto& pi : netlist.inputs()) {
    nets[pi.net] = inputs.at(pi.net);
    if (targeted[pi.net]) inject_flips(nets[pi.net], faults->rate, flip_src[pi.net]);
  }

  if (!netlist.has_state()) {
    std::array<std::uint64_t, 5> in{};
    for (std::size_t gi : lv.order) {
      const Gate& g = gates[gi];
      auto out = nets[g.output].words();
      for (std::size_t w = 0; w < out.size(); ++w) {
        for (std::size_t k = 0; k < g.inputs.size(); ++k) in[k] = nets[g.inputs[k]].words()[w];
        out[w] = eval_word(g.kind, std::span(in.data(), g.inputs.size()));
      }
      nets[g.output].trim();
      if (targeted[g.output]) inject_flips(nets[g.output], faults->rate, flip_src[g.output]);
    }
    return nets;
  }

  // Sequential evaluation: positions in order, STATE latches after each position.
  std::vector<std::uint8_t> latch(gates.size(), 0);
  std::array<std::uint64_t, 5> in{};
  for (std::size_t i = 0; i < length; ++i) {
    for (std::size_t gi : lv.order) {
      const Gate& g = gates[gi];
      bool v = false;
      if (g.kind == GateKind::State) {
        v = latch[gi] != 0;
      } else {
        for (std::size_t k = 0; k < g.inputs.size(); ++k) in[k] = nets[g.inputs[k]].get(i) ? 1 : 0;
        v = (eval_word(g.kind, std::span(in.data(), g.inputs.size())) & 1U) != 0;
      }
      if (targeted[g.output] && flip_src[g.output].uniform(i) < faults->rate) v = !v;
      nets[g.output].set(i, v);
    }
    for (std::size_t gi = 0; gi < gates.size(); ++gi)
      if (gates[gi].kind == GateKind::State) latch[gi] = nets[gates[gi].inputs[0]].get(i) ? 1 : 0;
  }
  return nets;
}

StreamMap simulate_functional(const Netlist& netlist, const StreamMap& inputs, const NetFaults* faults) {
  auto nets = simulate_nets(netlist, inputs, faults);
  StreamMap out;
  for (NetId po : netlist.outputs()) out.emplace(po, std::move(nets[po]));
  return out;
}

}  // namespace stochimc
