#include <doctest.h>

#include <cmath>
#include <random>

#include "stochimc/circuits.hpp"
#include "stochimc/errors.hpp"
#include "stochimc/functional.hpp"

using namespace stochimc;

namespace {

double evaluate(StochasticOp op, double a, double b, std::size_t len, std::uint64_t seed) {
  auto nl = build_stochastic_circuit(op);
  auto out = simulate_functional(nl, bind_inputs(nl, op_input_values(op, a, b), len, RandomSource(seed)));
  return decode_unipolar(out.at(nl.net("y")));
}

}  // namespace

TEST_CASE("operation examples") {
  CHECK(evaluate(StochasticOp::Mult, 0.5, 0.5, 4096, 1) == doctest::Approx(0.25).epsilon(0.02 / 0.25));
  CHECK(evaluate(StochasticOp::ScaledDiv, 0.25, 0.5, 16384, 2) == doctest::Approx(0.5).epsilon(0.05 / 0.5));
  CHECK(evaluate(StochasticOp::Exp, 1.0, 0.0, 4096, 3) == doctest::Approx(0.4490).epsilon(0.02 / 0.449));
  CHECK(std::abs(evaluate(StochasticOp::Sqrt, 0.49, 0.0, 4096, 4) - 0.70) <= 0.1);
}

TEST_CASE("analytic targets") {
  CHECK(exp_maclaurin5(0.8, 1.0) == doctest::Approx(1 - 0.8 + 0.32 - 0.08533333 + 0.01706667 - 0.00273067));
  CHECK(op_target(StochasticOp::ScaledAdd, 0.2, 0.6) == doctest::Approx(0.4));
  CHECK(op_target(StochasticOp::AbsSub, 0.2, 0.6) == doctest::Approx(0.4));
  // The fitted polynomial stays within its bound of sqrt over a dense grid.
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    double x = i / 100.0;
    worst = std::max(worst, std::abs(sqrt_polynomial(x) - std::sqrt(x)));
  }
  CHECK(worst <= SqrtFit::max_error + 1e-4);
  CHECK(worst <= 0.1);
}

TEST_CASE("circuits carry one annotation per arithmetic op") {
  auto nl = build_stochastic_circuit(StochasticOp::Sqrt);
  REQUIRE(nl.ops().size() == 1);
  CHECK(nl.ops()[0].output == nl.net("y"));
  CHECK_THROWS_AS(build_stochastic_circuit(StochasticOp::Exp, 1.5), DomainError);
}

TEST_CASE("op names parse") {
  CHECK(parse_stochastic_op("mult") == StochasticOp::Mult);
  CHECK(parse_stochastic_op("div") == StochasticOp::ScaledDiv);
  CHECK_FALSE(parse_stochastic_op("fft").has_value());
}

TEST_CASE("binary adder: exhaustive 4-bit and identities") {
  auto adder = build_binary_adder(4);
  auto add = [&](std::uint64_t a, std::uint64_t b) {
    return adder_result(adder, simulate_functional(adder.netlist, adder_inputs(adder, a, b)));
  };
  CHECK(add(3, 5) == 8);
  for (std::uint64_t a = 0; a < 16; ++a)
    for (std::uint64_t b = 0; b < 16; ++b) CHECK(add(a, b) == ((a + b) & 0xF));

  auto wide = build_binary_adder(8);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    std::uint64_t x = rng() & 0xFF;
    CHECK(adder_result(wide, simulate_functional(wide.netlist, adder_inputs(wide, 0, x))) == x);
  }
}
