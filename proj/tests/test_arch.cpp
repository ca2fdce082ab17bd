#include <doctest.h>

#include "stochimc/arch.hpp"
#include "stochimc/circuits.hpp"
#include "stochimc/errors.hpp"
#include "stochimc/functional.hpp"

using namespace stochimc;

namespace {

struct Run {
  PartitionPlan plan;
  ExecutionReport report;
  StreamMap golden;
};

Run run_op(StochasticOp op, const ArchConfig& cfg, std::uint64_t seed, double a = 0.6, double b = 0.8) {
  auto nl = build_stochastic_circuit(op);
  auto in = bind_inputs(nl, op_input_values(op, a, b), cfg.bitstream_length, RandomSource(seed));
  auto plan = plan_for(nl, cfg);
  auto report = execute_plan(plan, in, cfg);
  return {std::move(plan), std::move(report), simulate_functional(nl, in)};
}

ArchConfig with_q1(std::size_t bl) {
  ArchConfig cfg;
  cfg.bitstream_length = bl;
  cfg.q = 1;
  return cfg;
}

}  // namespace

TEST_CASE("bit positions spread over the bank group-first") {
  auto run = run_op(StochasticOp::Mult, with_q1(256), 1);
  CHECK(run.report.passes == 1);
  CHECK(run.report.chunks == 256);
  CHECK(run.report.wear.subarrays() == 256);
  for (std::size_t s = 0; s < 256; ++s) CHECK(run.report.wear.at(s, 0, 2) == 2);
}

TEST_CASE("pipeline passes and cycle linearity") {
  auto one = run_op(StochasticOp::Mult, with_q1(256), 1).report;
  auto two = run_op(StochasticOp::Mult, with_q1(512), 1).report;
  CHECK(one.passes == 1);
  CHECK(two.passes == 2);
  ArchConfig cfg;
  std::size_t per_pass = one.total_cycles - one.accumulation_steps;
  CHECK(two.total_cycles - 2 * per_pass == two.accumulation_steps + cfg.pass_transfer_cycles());
  CHECK(two.accumulation_steps == 32);

  ArchConfig banks = with_q1(512);
  banks.overflow = OverflowPolicy::ParallelBanks;
  auto wide = run_op(StochasticOp::Mult, banks, 1).report;
  CHECK(wide.passes == 1);
  CHECK(wide.required_banks == 2);
}

TEST_CASE("execution matches the golden model in both modes") {
  for (auto op : {StochasticOp::ScaledAdd, StochasticOp::Mult, StochasticOp::AbsSub, StochasticOp::ScaledDiv,
                  StochasticOp::Sqrt, StochasticOp::Exp})
    for (std::uint64_t seed : {1, 2, 3}) {
      for (auto mode : {ExecMode::BitParallel, ExecMode::BitSerial}) {
        ArchConfig cfg;
        cfg.mode = mode;
        auto run = run_op(op, cfg, seed);
        CHECK(run.report.outputs.at("y") == run.golden.begin()->second);
      }
      // Multi-pass with the feedback latch carried across passes.
      ArchConfig small;
      small.n = small.m = 2;
      small.q = 3;
      small.bitstream_length = 100;
      auto run = run_op(op, small, seed);
      CHECK(run.report.passes == 9);
      CHECK(run.report.outputs.at("y") == run.golden.begin()->second);
    }
}

TEST_CASE("partitioned circuits execute exactly") {
  CircuitBuilder b;
  std::vector<NetId> terms;
  for (int i = 0; i < 30; ++i) terms.push_back(b.mult(b.input("a" + std::to_string(i)), b.input("b" + std::to_string(i))));
  NetId avg = b.mux_average(terms);
  NetId x = b.input("x", 1);
  NetId y = b.input("z", 1);
  b.output(b.scaled_div(b.abs_sub(x, y), x), "ratio");
  b.output(avg, "avg");
  auto nl = b.take();
  InputValues values{{"x", 0.9}, {"z", 0.3}};
  for (int i = 0; i < 30; ++i) values["a" + std::to_string(i)] = values["b" + std::to_string(i)] = 0.02 * i;
  ArchConfig cfg;
  cfg.dims = {64, 24};
  cfg.bitstream_length = 200;
  auto in = bind_inputs(nl, values, 200, RandomSource(5));
  auto plan = plan_for(nl, cfg);
  CHECK(plan.parts.size() > 1);
  auto report = execute_plan(plan, in, cfg);
  auto golden = simulate_functional(nl, in);
  CHECK(report.outputs.at("avg") == golden.at(nl.net("avg")));
  CHECK(report.outputs.at("ratio") == golden.at(nl.net("ratio")));
  CHECK(report.census.logic[static_cast<std::size_t>(GateKind::Buff)] > 0);
}

TEST_CASE("accumulation") {
  ArchConfig cfg;
  auto run = run_op(StochasticOp::Mult, cfg, 1);
  auto acc = accumulate_outputs(run.report, cfg);
  CHECK(acc.steps == 32);
  CHECK(acc.binary.at("y") == run.report.outputs.at("y").ones());
  ArchConfig tiny;
  tiny.n = tiny.m = 1;
  CHECK(accumulate_outputs(run_op(StochasticOp::Mult, tiny, 1).report, tiny).steps == 2);

  ExecutionReport fake;
  Bitstream bs(256);
  for (std::size_t i = 0; i < 179; ++i) bs.set(i, true);
  fake.outputs.emplace("y", bs);
  fake.q = 1;
  CHECK(accumulate_outputs(fake, cfg).binary.at("y") == 179);
  fake.ones_per_bank_pass["y"] = {1000};
  CHECK_THROWS_AS(accumulate_outputs(fake, cfg), OverflowError);
}

TEST_CASE("multiplication energy equals the hand-computed closed form") {
  ArchConfig cfg;
  auto run = run_op(StochasticOp::Mult, cfg, 2);
  const double bl = 256.0;
  const double sbg = cfg.sbg_energy_aj();
  const auto& p = cfg.peripheral;
  CHECK(run.report.energy.preset == 3.0 * bl * cfg.e_preset_aj);
  CHECK(run.report.energy.init == 2.0 * bl * sbg);
  CHECK(run.report.energy.logic == bl * 28.7);
  CHECK(run.report.energy.peripheral == 256.0 * (p.subarray_driver_aj + p.local_accumulator_aj) +
                                            16.0 * p.global_accumulator_aj + 2.0 * p.btos_read_aj);
  auto closed = closed_form_energy(run.plan, cfg);
  CHECK(closed.total() == run.report.energy.total());

  ArchConfig twice = cfg;
  twice.bitstream_length = 512;
  auto doubled = run_op(StochasticOp::Mult, twice, 2).report.energy;
  CHECK(doubled.total() - doubled.peripheral == doctest::Approx(2.0 * (closed.total() - closed.peripheral)));
  CHECK(doubled.peripheral == closed.peripheral);
}

TEST_CASE("empty circuit costs only peripheral energy") {
  Netlist empty;
  ArchConfig cfg;
  auto report = execute_plan(plan_for(empty, cfg), {}, cfg);
  CHECK(report.energy.total() == report.energy.peripheral);
  CHECK_THROWS_AS(lifetime_score(report, 1e15), DomainError);
}

TEST_CASE("missing gate energy is a config error") {
  ArchConfig cfg;
  cfg.gate_energy_aj.erase(GateKind::And);
  auto nl = build_stochastic_circuit(StochasticOp::Mult);
  auto in = bind_inputs(nl, op_input_values(StochasticOp::Mult, 0.5, 0.5), 256, RandomSource(1));
  CHECK_THROWS_AS(execute_plan(plan_for(nl, cfg), in, cfg), ConfigError);
}

TEST_CASE("writes are conserved and wear concentrates in serial mode") {
  ArchConfig cfg;
  auto par = run_op(StochasticOp::Mult, cfg, 3).report;
  CHECK(par.total_writes == par.census.total());
  ArchConfig ser = cfg;
  ser.mode = ExecMode::BitSerial;
  auto s = run_op(StochasticOp::Mult, ser, 3).report;
  CHECK(s.total_writes == par.total_writes);
  CHECK(s.max_cell_writes == 256 * par.max_cell_writes);
  CHECK(lifetime_score(par, 1e15).score == doctest::Approx(256.0 * lifetime_score(s, 1e15).score));
  CHECK(s.accumulation_steps == 1);

  ExecutionReport a, b;
  a.utilized_cells = b.utilized_cells = 10;
  a.total_writes = 100;
  b.total_writes = 200;
  CHECK(lifetime_score(b, 1e15).score == doctest::Approx(lifetime_score(a, 1e15).score / 2));
}

TEST_CASE("toggle-only counting writes fewer cells") {
  ArchConfig cfg;
  cfg.toggle_only_writes = true;
  auto toggled = run_op(StochasticOp::ScaledAdd, cfg, 4).report;
  auto full = run_op(StochasticOp::ScaledAdd, ArchConfig{}, 4).report;
  CHECK(toggled.total_writes < full.total_writes);
  CHECK(toggled.outputs == full.outputs);
}

TEST_CASE("plan and config must agree") {
  ArchConfig cfg;
  auto nl = build_stochastic_circuit(StochasticOp::Mult);
  auto plan = plan_for(nl, cfg);
  ArchConfig other = cfg;
  other.bitstream_length = 128;
  auto in = bind_inputs(nl, op_input_values(StochasticOp::Mult, 0.5, 0.5), 128, RandomSource(1));
  CHECK_THROWS_AS(execute_plan(plan, in, other), ConfigError);
  ArchConfig bad;
  bad.square_layout = true;
  bad.n = 4;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
