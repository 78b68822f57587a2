#include "helpers.hpp"
#include "qhd/error.hpp"
#include "qhd/experiments.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

using namespace qhd;
using testing::kPi;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qhd_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json small_sweep(int parallelism) {
  return Json{{"experiment", "sweep"},
              {"grid", {{"n", 32}}},
              {"time", {{"dt", 1e-4}, {"t_final", 2e-3}, {"samples", 4}}},
              {"taus", {0.2, 0.1, 0.05}},
              {"eos", {{"family", "gamma_law"}, {"gamma", 2.0}}},
              {"initial", {{"rho", {{"profile", "cosine_perturbation"}, {"base", 1.0}, {"amplitude", 0.1}}}}},
              {"parallelism", parallelism}};
}

double column_max_abs(const Table& t, size_t col) {
  double m = 0.0;
  for (const auto& row : t.rows) m = std::max(m, std::abs(row[col]));
  return m;
}

}  // namespace

TEST_CASE("rate fit recovers exact power laws") {
  const std::vector<double> taus{0.4, 0.2, 0.1, 0.05};
  std::vector<double> lin, quad;
  for (double t : taus) {
    lin.push_back(3.0 * t);
    quad.push_back(3.0 * t * t);
  }
  RateFit a = fit_rate(taus, lin);
  RateFit b = fit_rate(taus, quad);
  CHECK(a.slope == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.slope == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(a.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  CHECK(a.residual <= 1e-12);
  CHECK_THROWS_AS(fit_rate({0.1, 0.05}, {1.0, 0.5}), Error);
  CHECK_THROWS_AS(fit_rate({0.1, 0.05, 0.01}, {1.0, 0.0, 0.5}), Error);
}

TEST_CASE("tau0 heuristic takes the smallest bound") {
  CHECK(tau0_heuristic(1e-2, 0.01) == doctest::Approx(std::sqrt(2e-4 / 8.01)));
  CHECK(tau0_heuristic(1e-2, 1.0) == doctest::Approx(1e-2));
  CHECK(tau0_heuristic(1e-6, 1.0) == doctest::Approx(1e-6));
  CHECK(tau0_heuristic(1.0, 100.0) == doctest::Approx(0.25));
}

TEST_CASE("parallel_for visits every index and rethrows the lowest failure") {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);

  std::atomic<int> ran{0};
  try {
    parallel_for(10, 3, [&](size_t i) {
      ++ran;
      if (i == 3 || i == 7) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "3");
  }
  CHECK(ran == 10);
}

TEST_CASE("configuration parsing") {
  ExperimentConfig c = parse_config(Json::object());
  CHECK(c.experiment == "simulate");
  CHECK(c.levels.size() == 3);
  CHECK(c.floor_for(2.0) == doctest::Approx(2e-4));

  CHECK_THROWS_AS(parse_config(Json{{"bogus", 1}}), Error);
  CHECK_THROWS_AS(parse_config(Json{{"grid", {{"n", 7}}}}), Error);
  CHECK_THROWS_AS(parse_config(Json{{"time", {{"dt", -1.0}}}}), Error);
  CHECK_THROWS_AS(parse_config(Json{{"taus", {0.1, 0.2, 0.05}}}), Error);
  CHECK_THROWS_AS(parse_config(Json{{"experiment", "nope"}}), Error);
  CHECK_THROWS_AS(parse_config(Json{{"eos", {{"family", "stiff"}}}}), Error);
  CHECK_THROWS_AS(parse_config(Json{{"initial", {{"rho", "well_prepared"}}}}), Error);
  try {
    parse_config(Json{{"grid", {{"n", "many"}}}});
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }

  ExperimentConfig t = parse_config(Json{{"initial", {{"rho", 2.0}}}, {"time", {{"dt", 1e-3}, {"t_final", 1.0}, {"samples", 10}}}});
  CHECK(t.rho0.kind == "constant");
  CHECK(t.rho0.sample(Grid(8))[3] == 2.0);
  CHECK(t.record_every(1e-3) == 100);
}

TEST_CASE("hashing and number formatting are stable") {
  Json a = Json::parse(R"({"b": 1, "a": [1, 2.5]})");
  Json b = Json::parse(R"({"a": [1, 2.5], "b": 1})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(Json::parse(R"({"a": [1, 2.5], "b": 2})")));
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("write_run emits the expected files") {
  ExperimentConfig cfg = parse_config(Json{{"time", {{"dt", 1e-3}, {"t_final", 1e-2}, {"samples", 5}}},
                                           {"grid", {{"n", 16}}}});
  RunOutput out = run_experiment(cfg);
  auto dir = fresh_dir("write_run");
  write_run(dir, cfg, out);
  CHECK(std::filesystem::exists(dir / "config.json"));
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(std::filesystem::exists(dir / "trajectory.csv"));
  CHECK(std::filesystem::exists(dir / "energy.dat"));
  Json summary = Json::parse(slurp(dir / "summary.json"));
  CHECK(summary["experiment"] == "simulate");
  CHECK(summary["pass_flags"]["mass_conserved"] == true);
  CHECK(slurp(dir / "energy.dat").rfind("# t", 0) == 0);

  auto again = fresh_dir("write_run_again");
  write_run(again, cfg, run_experiment(cfg));
  CHECK(slurp(dir / "trajectory.csv") == slurp(again / "trajectory.csv"));
  CHECK(slurp(dir / "summary.json") == slurp(again / "summary.json"));
}

TEST_CASE("sweep output does not depend on the thread count") {
  ExperimentConfig serial = parse_config(small_sweep(1));
  ExperimentConfig threaded = parse_config(small_sweep(4));
  RunOutput a = run_relaxation_sweep(serial);
  RunOutput b = run_relaxation_sweep(threaded);
  auto da = fresh_dir("sweep_serial"), db = fresh_dir("sweep_threaded");
  write_run(da, serial, a);
  write_run(db, threaded, b);
  REQUIRE(a.csv.size() == b.csv.size());
  for (const auto& t : a.csv) {
    CHECK(slurp(da / (t.name + ".csv")) == slurp(db / (t.name + ".csv")));
  }
  CHECK(slurp(da / "rate.dat") == slurp(db / "rate.dat"));
  CHECK(a.metrics.dump() == b.metrics.dump());
  CHECK(a.fitted_rate.dump() == b.fitted_rate.dump());
  CHECK(a.pass_flags["all_runs_completed"] == true);
}

TEST_CASE("decay experiment") {
  SUBCASE("constant data has vanishing functional") {
    ExperimentConfig cfg = parse_config(Json{{"experiment", "decay"},
                                             {"grid", {{"n", 16}}},
                                             {"time", {{"dt", 1e-4}, {"t_final", 2e-3}, {"samples", 10}}},
                                             {"tau", 0.05},
                                             {"eos", {{"family", "centered_power"}, {"n", 1}, {"M0", 1.0}}}});
    RunOutput out = run_entropy_decay(cfg);
    CHECK(column_max_abs(out.csv.front(), 1) <= 1e-14);
  }
  SUBCASE("large tau is outside the asserted regime") {
    ExperimentConfig cfg = parse_config(Json{{"experiment", "decay"},
                                             {"grid", {{"n", 16}}},
                                             {"time", {{"dt", 1e-3}, {"t_final", 1e-2}, {"samples", 10}}},
                                             {"tau", 10.0},
                                             {"initial", {{"rho", {{"profile", "cosine_perturbation"}, {"base", 1.0}, {"amplitude", 0.1}}}}}});
    RunOutput out = run_entropy_decay(cfg);
    CHECK(out.metrics["decay_asserted"] == false);
    CHECK_FALSE(out.pass_flags.contains("monotone_after_transient"));
  }
}

TEST_CASE("initial layer experiment") {
  SUBCASE("constant data has zero gap") {
    ExperimentConfig cfg = parse_config(Json{{"experiment", "layer"},
                                             {"grid", {{"n", 16}}},
                                             {"time", {{"dt", 1e-4}, {"t_final", 1e-3}, {"samples", 5}}},
                                             {"tau", 0.1},
                                             {"layer", {{"t_check", 1e-3}}}});
    RunOutput out = run_initial_layer(cfg);
    CHECK(column_max_abs(out.csv.front(), 1) <= 1e-12);
    CHECK(column_max_abs(out.csv.front(), 2) <= 1e-12);
  }
  SUBCASE("ill-prepared gap starts at the current mismatch") {
    const int n = 32;
    ExperimentConfig cfg = parse_config(
        Json{{"experiment", "layer"},
             {"grid", {{"n", n}}},
             {"time", {{"dt", 1e-4}, {"t_final", 1e-3}, {"samples", 5}}},
             {"tau", 0.1},
             {"eos", {{"family", "gamma_law"}, {"gamma", 2.0}}},
             {"initial", {{"rho", {{"profile", "cosine_perturbation"}, {"base", 1.0}, {"amplitude", 0.2}}}}},
             {"layer", {{"t_check", 1e-3}, {"ill_v", {{"profile", "cosine_perturbation"}, {"base", 0.0}, {"amplitude", 0.5}, {"mode", 2}}}}}});
    RunOutput out = run_initial_layer(cfg);
    Grid g(n);
    RealField rho = g.sample([](double x) { return 1.0 + 0.2 * std::cos(2 * kPi * x); });
    RealField v = g.sample([](double x) { return 0.5 * std::cos(4 * kPi * x); });
    QDDModel m;
    m.eos = EOS::gamma_law(2.0);
    m.doping = DopingProfile::uniform(g, integrate(g, rho));
    const double oracle = l2_norm(g, RealField(rho * v - constitutive_current(g, rho, m)));
    CHECK(out.csv.front().rows.front()[2] == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("validation on constant data") {
  ExperimentConfig cfg = parse_config(Json{{"experiment", "validate"},
                                           {"time", {{"t_final", 1e-3}, {"samples", 2}}},
                                           {"tau", 0.5},
                                           {"validate", {{"levels", {{16, 1e-4}, {32, 5e-5}}}}}});
  RunOutput out = run_validate(cfg);
  CHECK(out.metrics["finest_distance"].get<double>() <= 1e-12);
  CHECK(out.pass_flags["polar_identity"] == true);
}
