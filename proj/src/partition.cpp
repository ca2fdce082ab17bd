#include <algorithm>
#include <functional>
#include <set>

#include "stochimc/errors.hpp"
#include "stochimc/scheduler.hpp"

namespace stochimc {

namespace {

std::size_t row_blocks(const Netlist& nl) {
  std::size_t blocks = 1;
  for (const auto& pi : nl.inputs())
    if (!pi.bus.empty()) blocks = std::max<std::size_t>(blocks, pi.bus_bit + 1);
  return blocks;
}

// Gate indices in PO-cone depth-first post-order; gates of the STATE feedback cone are emitted
// together as one unit. Returns units of gate indices.
std::vector<std::vector<std::size_t>> cone_order(const Netlist& nl) {
  const auto& gates = nl.gates();
  const std::size_t n = gates.size();
  const Levelization lv = topo_layers(nl);

  // The STATE cone: gates both reachable from a STATE output and reaching a STATE input.
  std::vector<char> cone(n, 0);
  if (nl.has_state()) {
    std::vector<std::vector<std::size_t>> fanout(n);
    for (std::size_t g = 0; g < n; ++g)
      if (gates[g].kind != GateKind::State)
        for (NetId in : gates[g].inputs)
          if (auto d = nl.driver(in)) fanout[*d].push_back(g);
    std::vector<char> fwd(n, 0), bwd(n, 0);
    std::function<void(std::size_t)> go_fwd = [&](std::size_t g) {
      if (fwd[g]) return;
      fwd[g] = 1;
      for (std::size_t c : fanout[g]) go_fwd(c);
    };
    std::function<void(std::size_t)> go_bwd = [&](std::size_t g) {
      if (bwd[g]) return;
      bwd[g] = 1;
      if (gates[g].kind == GateKind::State) return;
      for (NetId in : gates[g].inputs)
        if (auto d = nl.driver(in)) go_bwd(*d);
    };
    for (std::size_t g = 0; g < n; ++g)
      if (gates[g].kind == GateKind::State) {
        go_fwd(g);
        if (auto d = nl.driver(gates[g].inputs[0])) go_bwd(*d);
      }
    for (std::size_t g = 0; g < n; ++g) cone[g] = gates[g].kind == GateKind::State || (fwd[g] && bwd[g]);
  }
  std::vector<std::size_t> cone_members;
  for (std::size_t g : lv.order)
    if (cone[g]) cone_members.push_back(g);

  std::vector<char> done(n, 0);
  std::vector<std::vector<std::size_t>> units;
  std::function<void(std::size_t)> visit = [&](std::size_t g) {
    if (done[g]) return;
    if (cone[g]) {
      for (std::size_t m : cone_members) done[m] = 1;
      for (std::size_t m : cone_members)
        if (gates[m].kind != GateKind::State)
          for (NetId in : gates[m].inputs)
            if (auto d = nl.driver(in); d && !cone[*d]) visit(*d);
      units.push_back(cone_members);
      return;
    }
    done[g] = 1;
    for (NetId in : gates[g].inputs)
      if (auto d = nl.driver(in)) visit(*d);
    units.push_back({g});
  };
  for (NetId po : nl.outputs())
    if (auto d = nl.driver(po)) visit(*d);
  for (std::size_t g : lv.order) visit(g);
  return units;
}

struct SubNetlist {
  Netlist netlist;
  std::vector<NetId> transferred;
  std::vector<NetId> parent_net;
};

SubNetlist extract(const Netlist& parent, const std::vector<std::size_t>& members,
                   const std::vector<char>& later_use) {
  const auto& gates = parent.gates();
  std::set<std::size_t> inside(members.begin(), members.end());
  SubNetlist sub;
  auto map_net = [&](NetId parent_id) {
    NetId id = sub.netlist.find_or_add_net(parent.net_name(parent_id));
    if (id >= sub.parent_net.size()) sub.parent_net.resize(id + 1);
    sub.parent_net[id] = parent_id;
    return id;
  };
  std::set<NetId> declared;
  // Inputs in parent input order first, then transferred nets in first-use order.
  std::set<NetId> needed;
  for (std::size_t g : members)
    for (NetId in : gates[g].inputs)
      if (auto d = parent.driver(in); !d || !inside.contains(*d)) needed.insert(in);
  for (const auto& pi : parent.inputs()) {
    if (!needed.contains(pi.net)) continue;
    NetId id = map_net(pi.net);
    if (!pi.bus.empty())
      sub.netlist.add_bus_bit(pi.bus, pi.bus_bit, pi.lineage);
    else if (pi.constant)
      sub.netlist.add_constant(parent.net_name(pi.net), *pi.constant, pi.lineage);
    else
      sub.netlist.add_input(parent.net_name(pi.net), pi.lineage);
    (void)id;
    declared.insert(pi.net);
  }
  for (std::size_t g : members)
    for (NetId in : gates[g].inputs)
      if (needed.contains(in) && !declared.contains(in)) {
        NetId id = map_net(in);
        sub.netlist.add_input(parent.net_name(in));
        sub.transferred.push_back(id);
        declared.insert(in);
      }
  for (std::size_t g : members) {
    std::vector<NetId> ins;
    for (NetId in : gates[g].inputs) ins.push_back(map_net(in));
    sub.netlist.add_gate(gates[g].kind, std::move(ins), map_net(gates[g].output), gates[g].id);
  }
  std::set<NetId> parent_pos(parent.outputs().begin(), parent.outputs().end());
  for (std::size_t g : members) {
    NetId out = gates[g].output;
    if (parent_pos.contains(out) || later_use[out]) sub.netlist.add_output(sub.netlist.net(parent.net_name(out)));
  }
  return sub;
}

}  // namespace

PartitionPlan partition_circuit(const Netlist& input, const SubarrayDims& dims, std::size_t bitstream_length,
                                const PartitionOptions& options) {
  if (bitstream_length < 1) throw DomainError("bitstream length must be at least 1");
  if (dims.cols < 3) throw CapacityError("a subarray needs at least 3 columns to hold one gate", 1, 3, dims.rows, dims.cols);
  bool primitive = std::all_of(input.gates().begin(), input.gates().end(), [](const Gate& g) { return is_primitive(g.kind); });
  const Netlist netlist = primitive ? input : lower_to_primitives(input);

  const std::size_t blocks = row_blocks(netlist);
  if (blocks > dims.rows)
    throw CapacityError("bus width exceeds subarray rows", blocks, 0, dims.rows, dims.cols);
  PartitionPlan plan;
  plan.bitstream_length = bitstream_length;
  plan.q = std::min(bitstream_length, dims.rows / blocks);
  if (options.q) {
    if (*options.q < 1 || *options.q * blocks > dims.rows)
      throw CapacityError("requested q does not fit the subarray rows", *options.q * blocks, 0, dims.rows, dims.cols);
    plan.q = std::min(*options.q, bitstream_length);
  }
  plan.chunks = (bitstream_length + plan.q - 1) / plan.q;
  for (NetId po : netlist.outputs()) {
    plan.outputs.push_back(po);
    plan.output_names.push_back(netlist.net_name(po));
  }

  // Whole circuit first.
  try {
    Schedule s = schedule_and_map(netlist, dims, plan.q, options.schedule);
    Partition part{netlist, std::move(s), {}, {}};
    for (NetId i = 0; i < netlist.net_count(); ++i) part.parent_net.push_back(i);
    plan.parts.push_back(std::move(part));
    return plan;
  } catch (const CapacityError& e) {
    if (e.required_rows > dims.rows) throw;
  }

  const auto units = cone_order(netlist);
  const auto& gates = netlist.gates();

  // Column estimate for a chunk: distinct external inputs plus one column per gate.
  auto estimate = [&](const std::vector<std::size_t>& members) {
    std::set<std::size_t> inside(members.begin(), members.end());
    std::set<NetId> external;
    for (std::size_t g : members)
      for (NetId in : gates[g].inputs)
        if (auto d = netlist.driver(in); !d || !inside.contains(*d)) external.insert(in);
    return external.size() + members.size();
  };

  std::vector<std::vector<std::size_t>> chunks;
  std::vector<std::size_t> current;
  for (const auto& unit : units) {
    std::vector<std::size_t> trial = current;
    trial.insert(trial.end(), unit.begin(), unit.end());
    if (estimate(trial) <= dims.cols) {
      current = std::move(trial);
      continue;
    }
    if (current.empty())
      throw CapacityError("gate " + std::to_string(gates[unit.front()].id) + " does not fit the subarray", plan.q,
                          estimate(unit), dims.rows, dims.cols);
    chunks.push_back(std::move(current));
    current = unit;
    if (estimate(current) > dims.cols)
      throw CapacityError("gate group starting at " + std::to_string(gates[unit.front()].id) +
                              " does not fit the subarray",
                          plan.q, estimate(unit), dims.rows, dims.cols);
  }
  if (!current.empty()) chunks.push_back(std::move(current));

  // Nets consumed by a later chunk must leave their chunk as outputs.
  std::vector<std::size_t> chunk_of(gates.size());
  for (std::size_t c = 0; c < chunks.size(); ++c)
    for (std::size_t g : chunks[c]) chunk_of[g] = c;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    std::vector<char> later_use(netlist.net_count(), 0);
    for (std::size_t g = 0; g < gates.size(); ++g)
      if (chunk_of[g] > c)
        for (NetId in : gates[g].inputs)
          if (auto d = netlist.driver(in); d && chunk_of[*d] == c) later_use[in] = 1;
    SubNetlist sub = extract(netlist, chunks[c], later_use);
    ScheduleOptions opts = options.schedule;
    opts.transferred = sub.transferred;
    Schedule s = schedule_and_map(sub.netlist, dims, plan.q, opts);
    plan.parts.push_back({std::move(sub.netlist), std::move(s), std::move(sub.transferred), std::move(sub.parent_net)});
  }
  return plan;
}

}  // namespace stochimc
