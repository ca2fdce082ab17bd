#include <iomanip>
#include <map>
#include <sstream>

#include "stochimc/scheduler.hpp"

namespace stochimc {

namespace {

std::string row_range(const Schedule& s, std::uint32_t block) {
  std::size_t first = block * s.q;
  return std::to_string(first) + "-" + std::to_string(first + s.q - 1);
}

}  // namespace

std::string dump_schedule(const Netlist& netlist, const Schedule& schedule) {
  std::ostringstream out;
  out << "# q=" << schedule.q << " p=" << schedule.p << " blocks=" << schedule.blocks
      << " logic_cycles=" << schedule.logic_cycles << " init_cycles=" << schedule.init_cycles
      << " cols=" << schedule.cols_used << " rows=" << schedule.rows_used << '\n';
  out << "# cycle, kind, [gate ids], in-cols, out-col, rows\n";
  const auto& gates = netlist.gates();
  for (const auto& step : schedule.steps) {
    out << step.cycle << ", " << (step.copy ? std::string("COPY") : std::string(to_string(step.kind))) << ", [";
    bool first = true;
    for (const auto& op : step.ops) {
      if (!op.gate) continue;
      out << (first ? "" : " ") << gates[*op.gate].id;
      first = false;
    }
    out << "], [";
    const auto& lead = step.ops.front();
    for (std::size_t k = 0; k < lead.inputs.size(); ++k) out << (k ? " " : "") << lead.inputs[k].col;
    out << "], " << lead.output.col << ", [";
    for (std::size_t i = 0; i < step.ops.size(); ++i) {
      const auto& op = step.ops[i];
      out << (i ? " " : "");
      if (step.copy && op.inputs[0].block != op.output.block) out << row_range(schedule, op.inputs[0].block) << ">";
      out << row_range(schedule, op.output.block);
    }
    out << ']';
    if (step.phase == StepPhase::Serial) out << " row-serial";
    out << '\n';
  }
  out << "# placements: net, rows, col\n";
  for (const auto& p : schedule.placements)
    out << netlist.net_name(p.net) << ", " << p.row << "-" << (p.row + p.rows - 1) << ", " << p.col << '\n';
  return out.str();
}

std::string emit_occupancy_map(const Netlist& netlist, const Schedule& schedule) {
  std::ostringstream out;
  out << "occupancy q=" << schedule.q << " blocks=" << schedule.blocks << " cols=" << schedule.cols_used << '\n';
  if (schedule.steps.empty() && netlist.inputs().empty()) {
    out << "(empty)\n";
    return out.str();
  }
  const std::size_t cols = schedule.cols_used;
  // '.' free, 'I' input, 'o' written earlier, '#' written this cycle
  std::vector<std::string> grid(schedule.blocks, std::string(cols, '.'));
  for (const auto& pi : netlist.inputs()) {
    const auto& home = schedule.home[pi.net];
    if (home) grid[home->block][home->col] = 'I';
  }
  out << "cycle  kind   block |cells|\n";
  for (const auto& step : schedule.steps) {
    std::map<std::uint32_t, std::string> touched;
    for (const auto& op : step.ops) {
      auto& row = touched.try_emplace(op.output.block, grid[op.output.block]).first->second;
      row[op.output.col] = '#';
    }
    std::string kind = step.copy ? "COPY" : std::string(to_string(step.kind));
    if (step.phase == StepPhase::Serial) kind += "*";
    for (const auto& [block, row] : touched)
      out << std::setw(5) << step.cycle << "  " << std::left << std::setw(6) << kind << std::right << std::setw(6)
          << block << " |" << row << "|\n";
    for (const auto& op : step.ops) grid[op.output.block][op.output.col] = 'o';
  }
  return out.str();
}

}  // namespace stochimc
