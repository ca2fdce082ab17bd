#include <doctest.h>

#include <string>

#include "stochimc/circuits.hpp"
#include "stochimc/errors.hpp"
#include "stochimc/functional.hpp"
#include "stochimc/netlist.hpp"

using namespace stochimc;

TEST_CASE("parse a one-gate netlist") {
  auto nl = parse_netlist("PI a\nPI b\nPO y\n1 AND a,b -> y\n");
  REQUIRE(nl.gates().size() == 1);
  CHECK(nl.gates()[0].kind == GateKind::And);
  CHECK(nl.inputs().size() == 2);
  CHECK(nl.net_name(nl.outputs()[0]) == "y");
}

TEST_CASE("parser diagnostics carry positions") {
  try {
    parse_netlist("PI a\nPI b\nPO y\n1 AND a,b -> y\n2 OR a,b -> y\n");
    FAIL("expected a multiple-driver error");
  } catch (const NetlistError& e) {
    CHECK(e.issue == NetlistIssue::MultipleDrivers);
    CHECK(e.line == 5);
    CHECK(std::string(e.what()).find("'y'") != std::string::npos);
  }
  try {
    parse_netlist("PI a\nPO y\n1 FROB a -> y\n");
    FAIL("expected an unknown-kind error");
  } catch (const NetlistError& e) {
    CHECK(e.issue == NetlistIssue::UnknownKind);
    CHECK(e.line == 3);
  }
  CHECK_THROWS_AS(parse_netlist("PI a\nPO y\n1 AND a -> y\n"), NetlistError);
  CHECK_THROWS_AS(parse_netlist("PI a\nPO y\n1 AND a,zz -> y\n"), NetlistError);
}

TEST_CASE("print and parse round trip") {
  for (auto op : {StochasticOp::ScaledAdd, StochasticOp::ScaledDiv, StochasticOp::Exp}) {
    auto nl = build_stochastic_circuit(op);
    CHECK(parse_netlist(print_netlist(nl)) == nl);
  }
  auto adder = build_binary_adder(4);
  CHECK(parse_netlist(print_netlist(adder.netlist)) == adder.netlist);
}

TEST_CASE("levelization") {
  auto chain = parse_netlist("PI a\nPO d\n1 NOT a -> b\n2 NOT b -> c\n3 NOT c -> d\n");
  auto lv = topo_layers(chain);
  CHECK(lv.depth == 3);
  CHECK(lv.layer == std::vector<std::size_t>{1, 2, 3});

  auto fan = parse_netlist("PI a\nPI b\nPO y\n1 AND a,b -> x1\n2 AND a,b -> x2\n3 OR x1,x2 -> y\n");
  auto lf = topo_layers(fan);
  CHECK(lf.depth == 2);
  CHECK(lf.inverse == std::vector<std::size_t>{1, 1, 0});

  CHECK_THROWS_AS(topo_layers(parse_netlist("PI a\nPO y\n1 AND a,y -> y\n")), CycleError);
  // A loop through STATE is legal.
  CHECK_NOTHROW(topo_layers(parse_netlist("PI a\nPO y\n1 STATE y -> q\n2 AND a,q -> y\n")));
}

TEST_CASE("lowering composite gates") {
  auto xor_nl = parse_netlist("PI a\nPI b\nPO y\n1 XOR a,b -> y\n");
  auto lowered = lower_to_primitives(xor_nl);
  for (const auto& g : lowered.gates()) CHECK(is_primitive(g.kind));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      StreamMap in{{lowered.net("a"), Bitstream(1, a)}, {lowered.net("b"), Bitstream(1, b)}};
      CHECK(simulate_functional(lowered, in).at(lowered.net("y")).get(0) == static_cast<bool>(a ^ b));
    }

  auto mux_nl = lower_to_primitives(parse_netlist("PI s\nPI a\nPI b\nPO y\n1 MUX s,a,b -> y\n"));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      StreamMap in{{mux_nl.net("s"), Bitstream(1, true)},
                   {mux_nl.net("a"), Bitstream(1, a)},
                   {mux_nl.net("b"), Bitstream(1, b)}};
      CHECK(simulate_functional(mux_nl, in).at(mux_nl.net("y")).get(0) == static_cast<bool>(a));
    }

  auto prim = build_stochastic_circuit(StochasticOp::Sqrt);
  CHECK(lower_to_primitives(prim) == prim);
}

TEST_CASE("word evaluation matches per-bit truth tables") {
  for (std::uint64_t pattern = 0; pattern < 32; ++pattern) {
    std::uint64_t bits[5];
    int count = 0;
    for (int k = 0; k < 5; ++k) {
      bits[k] = (pattern >> k) & 1U;
      count += static_cast<int>(bits[k]);
    }
    CHECK((eval_word(GateKind::Maj5b, std::span(bits, 5)) & 1U) == (count >= 3 ? 0U : 1U));
    int c3 = static_cast<int>(bits[0] + bits[1] + bits[2]);
    CHECK((eval_word(GateKind::Maj3b, std::span(bits, 3)) & 1U) == (c3 >= 2 ? 0U : 1U));
    CHECK((eval_word(GateKind::Nand, std::span(bits, 2)) & 1U) == ((bits[0] & bits[1]) ^ 1U));
    CHECK((eval_word(GateKind::Nor, std::span(bits, 2)) & 1U) == ((bits[0] | bits[1]) ^ 1U));
  }
}
