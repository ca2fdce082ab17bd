#include "stochimc/scheduler.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>

#include "stochimc/errors.hpp"

namespace stochimc {

namespace {

using CellKey = std::pair<NetId, std::uint32_t>;  // (net, block)

// Splits gates into the part before any STATE, the STATE feedback cone, and the part after it.
std::vector<StepPhase> classify_phases(const Netlist& nl) {
  const auto& gates = nl.gates();
  const std::size_t n = gates.size();
  std::vector<StepPhase> phase(n, StepPhase::Pre);
  if (!nl.has_state()) return phase;

  std::vector<std::vector<std::size_t>> fanout(n);
  for (std::size_t g = 0; g < n; ++g) {
    if (gates[g].kind == GateKind::State) continue;
    for (NetId in : gates[g].inputs)
      if (auto d = nl.driver(in)) fanout[*d].push_back(g);
  }
  std::vector<char> forward(n, 0), backward(n, 0);
  std::deque<std::size_t> work;
  for (std::size_t g = 0; g < n; ++g)
    if (gates[g].kind == GateKind::State) {
      forward[g] = 1;
      work.push_back(g);
    }
  while (!work.empty()) {
    std::size_t g = work.front();
    work.pop_front();
    for (std::size_t c : fanout[g])
      if (!forward[c]) {
        forward[c] = 1;
        work.push_back(c);
      }
  }
  for (std::size_t g = 0; g < n; ++g)
    if (gates[g].kind == GateKind::State)
      if (auto d = nl.driver(gates[g].inputs[0]); d && !backward[*d]) {
        backward[*d] = 1;
        work.push_back(*d);
      }
  while (!work.empty()) {
    std::size_t g = work.front();
    work.pop_front();
    if (gates[g].kind == GateKind::State) continue;
    for (NetId in : gates[g].inputs)
      if (auto d = nl.driver(in); d && !backward[*d]) {
        backward[*d] = 1;
        work.push_back(*d);
      }
  }
  for (std::size_t g = 0; g < n; ++g) {
    if (gates[g].kind == GateKind::State || (forward[g] && backward[g]))
      phase[g] = StepPhase::Serial;
    else if (forward[g])
      phase[g] = StepPhase::Post;
  }
  return phase;
}

class Mapper {
 public:
  Mapper(const Netlist& nl, const SubarrayDims& dims, std::size_t q, const ScheduleOptions& options)
      : nl_(nl), dims_(dims), q_(q), options_(options), lv_(topo_layers(nl)) {}

  Schedule run() {
    for (const auto& g : nl_.gates())
      if (!is_primitive(g.kind))
        throw DomainError("schedule_and_map expects a primitive netlist; lower composite gates first");
    sched_.q = q_;
    sched_.home.assign(nl_.net_count(), std::nullopt);
    sched_.cycle_of_gate.assign(nl_.gates().size(), 0);
    place_inputs();

    auto phase = classify_phases(nl_);
    for (StepPhase ph : {StepPhase::Pre, StepPhase::Serial, StepPhase::Post}) {
      std::vector<std::size_t> members;
      for (std::size_t g : lv_.order)
        if (phase[g] == ph) members.push_back(g);
      std::size_t before = sched_.steps.size();
      schedule_phase(ph, members);
      std::size_t count = sched_.steps.size() - before;
      if (ph == StepPhase::Pre) sched_.pre_cycles = count;
      if (ph == StepPhase::Serial) sched_.serial_cycles = count;
      if (ph == StepPhase::Post) sched_.post_cycles = count;
    }
    number_cycles();
    resolve_state_inputs();
    finish();
    return std::move(sched_);
  }

 private:
  void place_inputs() {
    std::map<std::string, std::uint32_t> bus_col;
    std::set<NetId> transferred(options_.transferred.begin(), options_.transferred.end());
    std::vector<char> col_transferred;
    std::uint32_t next = 0;
    std::uint32_t max_block = 0;
    for (const auto& pi : nl_.inputs()) {
      std::uint32_t col = 0;
      std::uint32_t block = 0;
      if (!pi.bus.empty()) {
        auto [it, inserted] = bus_col.try_emplace(pi.bus, next);
        if (inserted) {
          ++next;
          col_transferred.push_back(1);
        }
        col = it->second;
        block = pi.bus_bit;
      } else {
        col = next++;
        col_transferred.push_back(1);
      }
      if (!transferred.contains(pi.net)) col_transferred[col] = 0;
      max_block = std::max(max_block, block);
      set_home(pi.net, {block, col});
    }
    sched_.p = next;
    sched_.transfer_columns = static_cast<std::size_t>(std::count(col_transferred.begin(), col_transferred.end(), 1));
    sched_.blocks = nl_.inputs().empty() ? 1 : max_block + 1;
    next_col_.assign(sched_.blocks, 0);
    for (const auto& [key, col] : local_) next_col_[key.second] = std::max(next_col_[key.second], col + 1);
  }

  void set_home(NetId net, CellRef cell) {
    sched_.home[net] = cell;
    local_[{net, cell.block}] = cell.col;
  }

  std::uint32_t block_of(std::size_t g) const {
    const Gate& gate = nl_.gates()[g];
    if (gate.kind == GateKind::State) return 0;
    const auto& home = sched_.home[gate.inputs[0]];
    if (!home) throw DomainError("gate input '" + nl_.net_name(gate.inputs[0]) + "' not yet placed");
    return home->block;
  }

  std::uint32_t allocate(std::uint32_t block) {
    if (block >= next_col_.size()) next_col_.resize(block + 1, 0);
    return next_col_[block]++;
  }

  void emit_copies(StepPhase phase, std::vector<std::pair<NetId, std::uint32_t>> pending) {
    std::vector<CopyOp> made;
    for (auto [net, block] : pending) {
      CellRef from = *sched_.home[net];
      CellRef to{block, allocate(block)};
      local_[{net, block}] = to.col;
      made.push_back({net, from, to, 0});
    }
    if (!options_.batch_copies) {
      for (const auto& c : made) {
        Step step{0, phase, GateKind::Buff, true, {{std::nullopt, c.net, {c.from}, c.to}}};
        sched_.steps.push_back(std::move(step));
      }
      return;
    }
    std::map<std::pair<std::uint32_t, std::uint32_t>, Step> groups;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
    for (const auto& c : made) {
      auto key = std::make_pair(c.from.col, c.to.col);
      auto [it, inserted] = groups.try_emplace(key, Step{0, phase, GateKind::Buff, true, {}});
      if (inserted) order.push_back(key);
      it->second.ops.push_back({std::nullopt, c.net, {c.from}, c.to});
    }
    for (const auto& key : order) sched_.steps.push_back(std::move(groups[key]));
  }

  void schedule_phase(StepPhase phase, const std::vector<std::size_t>& members) {
    if (members.empty()) return;
    const auto& gates = nl_.gates();
    std::set<std::size_t> in_phase(members.begin(), members.end());
    std::unordered_map<std::size_t, std::size_t> asap, inv;
    std::size_t depth = 0;
    for (std::size_t g : members) {
      std::size_t level = 1;
      if (gates[g].kind != GateKind::State)
        for (NetId in : gates[g].inputs)
          if (auto d = nl_.driver(in); d && in_phase.contains(*d)) level = std::max(level, asap[*d] + 1);
      asap[g] = level;
      depth = std::max(depth, level);
    }
    for (auto it = members.rbegin(); it != members.rend(); ++it) {
      std::size_t g = *it;
      inv.try_emplace(g, 0);
      if (gates[g].kind == GateKind::State) continue;
      for (NetId in : gates[g].inputs)
        if (auto d = nl_.driver(in); d && in_phase.contains(*d)) inv[*d] = std::max(inv[*d], inv[g] + 1);
    }
    std::vector<std::vector<std::size_t>> layers(depth + 1);
    for (std::size_t g : members) layers[depth - inv[g]].push_back(g);

    for (auto& layer : layers) {
      std::sort(layer.begin(), layer.end());
      // Subsets: same kind, no shared operand cell identity.
      struct Subset {
        GateKind kind;
        std::vector<std::size_t> gates;
        std::set<CellKey> operands;
      };
      std::vector<Subset> subsets;
      for (std::size_t g : layer) {
        const Gate& gate = gates[g];
        if (gate.kind == GateKind::State) {
          subsets.push_back({gate.kind, {g}, {}});
          continue;
        }
        std::uint32_t b = block_of(g);
        std::set<CellKey> ids;
        for (NetId in : gate.inputs) ids.insert({in, b});
        auto fits = [&](const Subset& s) {
          if (s.kind != gate.kind || s.kind == GateKind::State) return false;
          return std::none_of(ids.begin(), ids.end(), [&](const CellKey& k) { return s.operands.contains(k); });
        };
        auto it = std::find_if(subsets.begin(), subsets.end(), fits);
        if (it == subsets.end()) {
          subsets.push_back({gate.kind, {g}, ids});
        } else {
          it->gates.push_back(g);
          it->operands.insert(ids.begin(), ids.end());
        }
      }
      auto mean_inverse = [&](const Subset& s) {
        double sum = 0.0;
        for (std::size_t g : s.gates) sum += static_cast<double>(lv_.inverse[g]);
        return sum / static_cast<double>(s.gates.size());
      };
      auto min_id = [&](const Subset& s) {
        std::uint32_t m = UINT32_MAX;
        for (std::size_t g : s.gates) m = std::min(m, gates[g].id);
        return m;
      };
      std::stable_sort(subsets.begin(), subsets.end(), [&](const Subset& a, const Subset& b) {
        double ma = mean_inverse(a), mb = mean_inverse(b);
        if (ma != mb) return ma > mb;
        return min_id(a) < min_id(b);
      });
      for (const auto& subset : subsets) schedule_subset(phase, subset.gates);
    }
  }

  void schedule_subset(StepPhase phase, const std::vector<std::size_t>& members) {
    const auto& gates = nl_.gates();
    if (gates[members[0]].kind == GateKind::State) {
      std::size_t g = members[0];
      std::uint32_t b = 0;
      CellRef out{b, allocate(b)};
      set_home(gates[g].output, out);
      // Input cell resolved once the latched net is placed.
      sched_.steps.push_back({0, phase, GateKind::State, false, {{g, gates[g].output, {}, out}}});
      step_of_gate_[g] = sched_.steps.size() - 1;
      return;
    }
    // Bring misaligned operands into the row block of each gate's first input.
    std::vector<std::pair<NetId, std::uint32_t>> pending;
    for (std::size_t g : members) {
      std::uint32_t b = block_of(g);
      for (std::size_t k = 1; k < gates[g].inputs.size(); ++k) {
        NetId in = gates[g].inputs[k];
        if (!sched_.home[in]) throw DomainError("net '" + nl_.net_name(in) + "' used before placement");
        std::pair<NetId, std::uint32_t> key{in, b};
        if (!local_.contains(key) && std::find(pending.begin(), pending.end(), key) == pending.end())
          pending.push_back(key);
      }
    }
    emit_copies(phase, std::move(pending));

    // Sub-subsets of identical input-column tuples, one cycle each.
    std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::size_t>>> groups;
    for (std::size_t g : members) {
      std::uint32_t b = block_of(g);
      std::vector<std::uint32_t> cols;
      for (NetId in : gates[g].inputs) cols.push_back(local_.at({in, b}));
      auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& e) { return e.first == cols; });
      if (it == groups.end())
        groups.push_back({cols, {g}});
      else
        it->second.push_back(g);
    }
    for (const auto& [cols, group] : groups) {
      std::uint32_t out_col = 0;
      for (std::size_t g : group) {
        std::uint32_t b = block_of(g);
        if (b >= next_col_.size()) next_col_.resize(b + 1, 0);
        out_col = std::max(out_col, next_col_[b]);
      }
      Step step{0, phase, gates[group[0]].kind, false, {}};
      for (std::size_t g : group) {
        std::uint32_t b = block_of(g);
        next_col_[b] = out_col + 1;
        CellOp op{g, gates[g].output, {}, {b, out_col}};
        for (std::uint32_t c : cols) op.inputs.push_back({b, c});
        set_home(gates[g].output, {b, out_col});
        step.ops.push_back(std::move(op));
      }
      sched_.steps.push_back(std::move(step));
      for (std::size_t g : group) step_of_gate_[g] = sched_.steps.size() - 1;
    }
  }

  void number_cycles() {
    std::uint32_t pre = 0, serial = 0, post = 0;
    const auto q = static_cast<std::uint32_t>(q_);
    const auto pre_total = static_cast<std::uint32_t>(sched_.pre_cycles);
    const auto serial_total = static_cast<std::uint32_t>(sched_.serial_cycles);
    for (auto& step : sched_.steps) {
      switch (step.phase) {
        case StepPhase::Pre: step.cycle = ++pre; break;
        case StepPhase::Serial: step.cycle = pre_total + ++serial; break;
        case StepPhase::Post: step.cycle = pre_total + q * serial_total + ++post; break;
      }
    }
    for (const auto& [g, s] : step_of_gate_) sched_.cycle_of_gate[g] = sched_.steps[s].cycle;
    for (const auto& step : sched_.steps)
      if (step.copy)
        for (const auto& op : step.ops) sched_.copies.push_back({op.net, op.inputs[0], op.output, step.cycle});
  }

  void resolve_state_inputs() {
    const auto& gates = nl_.gates();
    for (auto& step : sched_.steps) {
      if (step.kind != GateKind::State) continue;
      for (auto& op : step.ops) {
        NetId latched = gates[*op.gate].inputs[0];
        auto it = local_.find({latched, op.output.block});
        if (it == local_.end())
          throw DomainError("STATE input '" + nl_.net_name(latched) + "' is not placed in the STATE row block");
        op.inputs = {{op.output.block, it->second}};
      }
    }
  }

  void finish() {
    sched_.logic_cycles = sched_.logic_cycles_for(q_);
    std::size_t inputs = sched_.p - sched_.transfer_columns;
    sched_.init_cycles = inputs * options_.init_cycles_per_input + sched_.transfer_columns;
    std::size_t cols = 0;
    for (auto c : next_col_) cols = std::max<std::size_t>(cols, c);
    sched_.cols_used = cols;
    sched_.rows_used = sched_.blocks * q_;
    for (const auto& [key, col] : local_)
      sched_.placements.push_back({key.first, static_cast<std::uint32_t>(key.second * q_),
                                   static_cast<std::uint32_t>(q_), col});
    std::sort(sched_.placements.begin(), sched_.placements.end(), [](const Placement& a, const Placement& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    if (sched_.cols_used > dims_.cols || sched_.rows_used > dims_.rows)
      throw CapacityError("schedule needs " + std::to_string(sched_.rows_used) + "x" + std::to_string(sched_.cols_used) +
                              " cells but the subarray is " + std::to_string(dims_.rows) + "x" +
                              std::to_string(dims_.cols) + "; partition the circuit",
                          sched_.rows_used, sched_.cols_used, dims_.rows, dims_.cols);
  }

  const Netlist& nl_;
  SubarrayDims dims_;
  std::size_t q_;
  ScheduleOptions options_;
  Levelization lv_;
  Schedule sched_;
  std::map<CellKey, std::uint32_t> local_;  // every cell holding a net, by (net, block)
  std::vector<std::uint32_t> next_col_;
  std::map<std::size_t, std::size_t> step_of_gate_;
};

}  // namespace

Schedule schedule_and_map(const Netlist& netlist, const SubarrayDims& dims, std::size_t q,
                          const ScheduleOptions& options) {
  if (dims.rows < 1 || dims.cols < 1) throw DomainError("subarray dimensions must be positive");
  if (q < 1) throw DomainError("sub-bitstream length q must be at least 1");
  return Mapper(netlist, dims, q, options).run();
}

std::vector<std::string> check_schedule(const Netlist& netlist, const Schedule& schedule, const SubarrayDims& dims) {
  std::vector<std::string> issues;
  const auto& gates = netlist.gates();
  auto cell_name = [](CellRef c) { return "(" + std::to_string(c.block) + "," + std::to_string(c.col) + ")"; };

  // Which net each cell holds and when it is written; primary inputs are written at cycle 0.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<NetId, std::uint32_t>> cells;
  auto write = [&](CellRef c, NetId net, std::uint32_t cycle) {
    auto [it, inserted] = cells.try_emplace({c.block, c.col}, net, cycle);
    if (!inserted) issues.push_back("cell " + cell_name(c) + " written by more than one net");
    if ((c.block + 1) * schedule.q > dims.rows || c.col >= dims.cols)
      issues.push_back("cell " + cell_name(c) + " out of bounds");
  };
  for (const auto& pi : netlist.inputs()) write(*schedule.home[pi.net], pi.net, 0);
  for (const auto& step : schedule.steps)
    for (const auto& op : step.ops) write(op.output, op.net, step.cycle);

  std::vector<char> scheduled(gates.size(), 0);
  for (const auto& step : schedule.steps) {
    std::set<std::pair<NetId, std::uint32_t>> operands;
    std::optional<std::vector<std::uint32_t>> cols;
    std::optional<std::uint32_t> out_col;
    for (const auto& op : step.ops) {
      if (step.copy != !op.gate.has_value()) issues.push_back("cycle " + std::to_string(step.cycle) + " mixes copies and gates");
      if (op.gate) {
        scheduled[*op.gate] = 1;
        const Gate& g = gates[*op.gate];
        if (g.kind != step.kind) issues.push_back("cycle " + std::to_string(step.cycle) + " mixes gate kinds");
        if (op.inputs.size() != g.inputs.size()) {
          issues.push_back("gate " + std::to_string(g.id) + " has wrong operand count");
          continue;
        }
        for (std::size_t k = 0; k < op.inputs.size(); ++k) {
          auto it = cells.find({op.inputs[k].block, op.inputs[k].col});
          if (it == cells.end() || it->second.first != g.inputs[k]) {
            issues.push_back("gate " + std::to_string(g.id) + " operand " + std::to_string(k) + " reads the wrong cell");
            continue;
          }
          bool feedback = g.kind == GateKind::State;
          if (!feedback && it->second.second >= step.cycle)
            issues.push_back("gate " + std::to_string(g.id) + " reads a cell before it is written");
          if (!operands.insert({g.inputs[k], op.inputs[k].block}).second && !feedback)
            issues.push_back("cycle " + std::to_string(step.cycle) + " shares an input between gates");
          if (!feedback && op.inputs[k].block != op.output.block)
            issues.push_back("gate " + std::to_string(g.id) + " output row differs from its input row");
        }
        if (g.kind != GateKind::State)
          for (NetId in : g.inputs)
            if (auto d = netlist.driver(in); d && schedule.cycle_of_gate[*d] >= schedule.cycle_of_gate[*op.gate])
              issues.push_back("gate " + std::to_string(g.id) + " scheduled before its fan-in");
      }
      std::vector<std::uint32_t> in_cols;
      for (const auto& c : op.inputs) in_cols.push_back(c.col);
      if (!cols) cols = in_cols;
      else if (*cols != in_cols && step.kind != GateKind::State)
        issues.push_back("cycle " + std::to_string(step.cycle) + " input columns are not aligned");
      if (!out_col) out_col = op.output.col;
      else if (*out_col != op.output.col)
        issues.push_back("cycle " + std::to_string(step.cycle) + " output columns are not aligned");
    }
  }
  for (std::size_t g = 0; g < gates.size(); ++g)
    if (!scheduled[g]) issues.push_back("gate " + std::to_string(gates[g].id) + " never scheduled");
  if (schedule.logic_cycles != schedule.logic_cycles_for(schedule.q)) issues.push_back("logic cycle total inconsistent");
  return issues;
}

}  // namespace stochimc
