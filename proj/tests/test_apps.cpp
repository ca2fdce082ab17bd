#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "stochimc/apps.hpp"
#include "stochimc/errors.hpp"

using namespace stochimc;

namespace {

ArchConfig config_bl(std::size_t bl) {
  ArchConfig cfg;
  cfg.bitstream_length = bl;
  return cfg;
}

EvalOptions functional() {
  EvalOptions o;
  o.engine = Engine::Functional;
  return o;
}

AppInput small_input(AppKind kind) { return synthetic_input(kind, kind == AppKind::Hdp ? 16 : 4, 3, 2); }

}  // namespace

TEST_CASE("golden identities") {
  std::vector<double> flat(81, 0.4);
  CHECK(lit_threshold(flat) == doctest::Approx(0.2));
  CHECK_THROWS_AS(lit_threshold({}), DomainError);

  OlInput ol{2, 1, {{1, 1, 1, 1, 1, 1}, {0.5, 1, 1, 1, 1, 0.5}}};
  CHECK(golden_eval(ol) == std::vector<double>{1.0, 0.25});

  HdpCase sym;
  CHECK(hdp_probability(sym) == doctest::Approx(0.5));

  std::vector<double> hist(8, 0.3);
  CHECK(kde_density(0.3, hist, 4.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(kde_density(0.3, {}, 4.0), DomainError);
}

TEST_CASE("LIT golden on a hand-computed window") {
  std::vector<double> w{0.0, 1.0};
  // mean 0.5, mean of squares 0.5, sigma 0.5
  CHECK(lit_threshold(w) == doctest::Approx(0.5 * 1.5 / 2));
}

TEST_CASE("stochastic app examples") {
  ArchConfig cfg;
  OlInput ones{4, 4, std::vector<std::array<double, 6>>(16, {1, 1, 1, 1, 1, 1})};
  auto r = stochastic_eval(ones, cfg, RandomSource(1));
  for (double v : r.stochastic) CHECK(v == 1.0);

  ImageGrid frame(4, 4, 90);
  KdeInput kde{{frame, frame, frame, frame}, frame, 4.0};
  for (double v : stochastic_eval(kde, cfg, RandomSource(2), functional()).stochastic)
    CHECK(v == doctest::Approx(1.0).epsilon(0.02));

  HdpInput hdp{std::vector<HdpCase>(64)};
  double mean = 0.0;
  auto hr = stochastic_eval(hdp, cfg, RandomSource(3));
  for (double v : hr.stochastic) mean += v / 64.0;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.05 / 0.5));
}

TEST_CASE("engines agree bit for bit and instance parallelism is invisible") {
  for (auto kind : {AppKind::Lit, AppKind::Ol, AppKind::Hdp, AppKind::Kde}) {
    auto in = small_input(kind);
    EvalOptions arch;
    arch.keep_streams = true;
    EvalOptions fun = functional();
    fun.keep_streams = true;
    auto a = stochastic_eval(in, config_bl(128), RandomSource(4), arch);
    auto f = stochastic_eval(in, config_bl(128), RandomSource(4), fun);
    CHECK(a.output_streams == f.output_streams);
    arch.policy = ExecPolicy::Serial;
    auto serial = stochastic_eval(in, config_bl(128), RandomSource(4), arch);
    CHECK(serial.output_streams == a.output_streams);
    CHECK(serial.energy.total() == a.energy.total());
    CHECK(a.energy.total() == doctest::Approx(a.energy.logic + a.energy.preset + a.energy.init + a.energy.peripheral));
  }
}

TEST_CASE("node trace covers each op boundary once") {
  for (auto kind : {AppKind::Lit, AppKind::Ol, AppKind::Hdp, AppKind::Kde}) {
    auto circuit = build_app_circuit(small_input(kind));
    auto trace = node_trace(circuit);
    std::set<std::string> unique(trace.begin(), trace.end());
    CHECK(unique.size() == trace.size());
    for (const auto& stage : circuit.stages)
      for (const auto& op : stage.netlist.ops()) {
        CHECK(unique.contains(stage.name + ":" + stage.netlist.net_name(op.output)));
        for (NetId n : op.inputs) CHECK(unique.contains(stage.name + ":" + stage.netlist.net_name(n)));
      }
  }
}

TEST_CASE("error shrinks with longer streams") {
  for (auto kind : {AppKind::Lit, AppKind::Ol, AppKind::Hdp, AppKind::Kde}) {
    auto in = small_input(kind);
    std::vector<double> mae;
    for (std::size_t bl : {64, 256, 1024, 4096}) {
      double sum = 0.0;
      const int trials = 100;
      for (int t = 0; t < trials; ++t)
        sum += stochastic_eval(in, config_bl(bl), RandomSource(10, t), functional()).mae_percent;
      mae.push_back(sum / trials);
    }
    INFO(to_string(kind), " ", mae[0], " ", mae[1], " ", mae[2], " ", mae[3]);
    CHECK(mae[3] < mae[0]);
    for (std::size_t i = 1; i < mae.size(); ++i) CHECK(mae[i] <= mae[i - 1] * 1.05 + 0.05);
  }
}

TEST_CASE("input loading") {
  auto dir = std::filesystem::temp_directory_path() / "stochimc_test_apps";
  std::filesystem::create_directories(dir);
  ImageGrid gray(9, 9, 128);
  std::vector<ImageGrid> one{gray};
  write_pgm_file(dir / "flat.pgm", one);
  auto lit = std::get<LitInput>(load_inputs(dir / "flat.pgm", AppKind::Lit));
  for (double v : lit.image.window(4, 4, 9)) CHECK(v == doctest::Approx(0.502).epsilon(0.001));

  CHECK_THROWS_AS(parse_probability_json(R"({"cases":[{"bp":1.3,"cp":0.5,"e":0.5,"d":0.5,"hd_given":[0.5,0.5,0.5,0.5]}]})",
                                         AppKind::Hdp),
                  DomainError);
  CHECK_THROWS_AS(parse_probability_json(R"({"width": 1, "height": )", AppKind::Ol), ParseError);
  auto ol = std::get<OlInput>(
      parse_probability_json(R"({"width":1,"height":1,"likelihoods":[[1,1,0.5,1,1,1]]})", AppKind::Ol));
  CHECK(golden_eval(ol)[0] == 0.5);

  std::vector<std::uint8_t> junk{'P', '2', '\n'};
  CHECK_THROWS_AS(parse_pgm(junk), ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic inputs are deterministic and valid") {
  for (auto kind : {AppKind::Lit, AppKind::Ol, AppKind::Hdp, AppKind::Kde}) {
    auto a = synthetic_input(kind, 8, 42);
    auto b = synthetic_input(kind, 8, 42);
    CHECK(golden_eval(a) == golden_eval(b));
    CHECK_NOTHROW(validate(a));
  }
  CHECK(std::get<OlInput>(synthetic_input(AppKind::Ol, 64, 1)).likelihoods.size() == 4096);
}

TEST_CASE("zero-fault error at the default stream length") {
  ArchConfig cfg;
  for (auto kind : {AppKind::Lit, AppKind::Ol, AppKind::Hdp, AppKind::Kde}) {
    auto in = synthetic_input(kind, kind == AppKind::Hdp ? 256 : 16, 1, 8);
    auto r = stochastic_eval(in, cfg, RandomSource(1), functional());
    INFO(to_string(kind), " mae ", r.mae_percent);
    CHECK(r.mae_percent <= 5.0);
  }
}
