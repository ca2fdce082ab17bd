#include <doctest.h>

#include <set>
#include <sstream>

#include "stochimc/circuits.hpp"
#include "stochimc/errors.hpp"
#include "stochimc/scheduler.hpp"

using namespace stochimc;

namespace {

std::set<std::uint32_t> cycles_in_map(const std::string& map) {
  std::set<std::uint32_t> cycles;
  std::istringstream in(map);
  std::string line;
  std::getline(in, line);  // header
  std::getline(in, line);  // column legend
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::uint32_t c = 0;
    if (fields >> c) cycles.insert(c);
  }
  return cycles;
}

}  // namespace

TEST_CASE("multiplication maps to one cycle and three columns") {
  auto nl = build_stochastic_circuit(StochasticOp::Mult);
  auto s = schedule_and_map(nl, {}, 256);
  CHECK(s.logic_cycles == 1);
  CHECK(s.cols_used == 3);
  CHECK(s.rows_used == 256);
  CHECK(s.p == 2);
  CHECK(s.init_cycles == 4);
  CHECK(check_schedule(nl, s, {}).empty());
}

TEST_CASE("scaled addition takes four cycles") {
  auto nl = build_stochastic_circuit(StochasticOp::ScaledAdd);
  auto s = schedule_and_map(nl, {}, 256);
  CHECK(s.logic_cycles == 4);
  CHECK(check_schedule(nl, s, {}).empty());
}

TEST_CASE("ripple-carry adder cycle counts") {
  for (auto [bits, cycles] : {std::pair<std::size_t, std::size_t>{4, 9}, {8, 17}, {2, 5}, {16, 33}}) {
    auto adder = build_binary_adder(bits);
    auto s = schedule_and_map(adder.netlist, {}, 1);
    CHECK(s.logic_cycles == cycles);
    CHECK(s.blocks == bits);
    CHECK(check_schedule(adder.netlist, s, {}).empty());
  }
}

TEST_CASE("every circuit schedules soundly") {
  for (auto op : {StochasticOp::ScaledAdd, StochasticOp::Mult, StochasticOp::AbsSub, StochasticOp::ScaledDiv,
                  StochasticOp::Sqrt, StochasticOp::Exp}) {
    auto nl = build_stochastic_circuit(op);
    for (std::size_t q : {1, 7, 256}) {
      auto s = schedule_and_map(nl, {}, q);
      CHECK(check_schedule(nl, s, {}).empty());
      for (const auto& g : nl.gates()) CHECK(s.home[g.output].has_value());
    }
  }
}

TEST_CASE("the feedback divider runs its cone row by row") {
  auto nl = build_stochastic_circuit(StochasticOp::ScaledDiv);
  auto s = schedule_and_map(nl, {}, 256);
  CHECK(s.has_serial_block());
  CHECK(s.logic_cycles_for(256) == s.pre_cycles + 256 * s.serial_cycles + s.post_cycles);
  CHECK(dump_schedule(nl, s).find("row-serial") != std::string::npos);
}

TEST_CASE("capacity-driven sub-bitstream length") {
  auto nl = build_stochastic_circuit(StochasticOp::Mult);
  auto whole = partition_circuit(nl, {}, 256);
  CHECK(whole.q == 256);
  CHECK(whole.chunks == 1);
  auto narrow = partition_circuit(nl, {4, 256}, 256);
  CHECK(narrow.q == 4);
  CHECK(narrow.chunks == 64);
  PartitionOptions one;
  one.q = 1;
  CHECK(partition_circuit(nl, {}, 256, one).q == 1);
  PartitionOptions too_many;
  too_many.q = 300;
  CHECK_THROWS_AS(partition_circuit(nl, {256, 256}, 256, too_many), CapacityError);
  CHECK_THROWS_AS(partition_circuit(nl, {256, 2}, 256), CapacityError);
}

TEST_CASE("wide circuits split into column-bounded partitions") {
  CircuitBuilder b;
  std::vector<NetId> terms;
  for (int i = 0; i < 40; ++i) terms.push_back(b.mult(b.input("a" + std::to_string(i)), b.input("b" + std::to_string(i))));
  b.output(b.mux_average(terms), "y");
  auto nl = b.take();
  SubarrayDims dims{64, 32};
  auto plan = partition_circuit(nl, dims, 64);
  CHECK(plan.parts.size() > 1);
  for (const auto& part : plan.parts) {
    CHECK(part.schedule.cols_used <= dims.cols);
    CHECK(check_schedule(part.netlist, part.schedule, dims).empty());
  }
  CHECK(plan.output_names == std::vector<std::string>{"y"});
}

TEST_CASE("occupancy map") {
  auto mult = build_stochastic_circuit(StochasticOp::Mult);
  auto map = emit_occupancy_map(mult, schedule_and_map(mult, {}, 256));
  CHECK(map.find("AND") != std::string::npos);
  CHECK(map.find("|II#|") != std::string::npos);
  CHECK(cycles_in_map(map).size() == 1);

  Netlist empty;
  CHECK(emit_occupancy_map(empty, schedule_and_map(empty, {}, 1)).find("(empty)") != std::string::npos);

  auto adder = build_binary_adder(4);
  CHECK(cycles_in_map(emit_occupancy_map(adder.netlist, schedule_and_map(adder.netlist, {}, 1))).size() == 9);
}
