#include "qhd/config.hpp"

#include "qhd/error.hpp"

#include <fmt/core.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>

namespace qhd {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

void require_object(const Json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(fmt::format("{}.{}: {}", where, key, e.what()));
  }
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

ProfileSpec parse_profile(const Json& j, const std::string& where) {
  ProfileSpec p;
  if (j.is_string()) {
    p.kind = j.get<std::string>();
    if (p.kind != "well_prepared") fail(where + ": only \"well_prepared\" may be given as a string");
    return p;
  }
  if (j.is_number()) {
    p.kind = "constant";
    p.value = j.get<double>();
    return p;
  }
  require_object(j, where, {"profile", "value", "base", "amplitude", "mode", "values"});
  p.kind = get<std::string>(j, "profile", where);
  if (p.kind == "constant") {
    p.value = get<double>(j, "value", where);
  } else if (p.kind == "cosine_perturbation") {
    read(j, "base", p.value, where);
    p.amplitude = get<double>(j, "amplitude", where);
    read(j, "mode", p.mode, where);
  } else if (p.kind == "table") {
    p.table = get<std::vector<double>>(j, "values", where);
  } else {
    fail(fmt::format("{}: unknown profile '{}'", where, p.kind));
  }
  return p;
}

}  // namespace

RealField ProfileSpec::sample(const Grid& grid) const {
  if (kind == "constant") return RealField::Constant(grid.size(), value);
  if (kind == "cosine_perturbation") {
    const double k = 2.0 * std::numbers::pi * mode;
    return grid.sample([&](double x) { return value + amplitude * std::cos(k * x); });
  }
  if (kind == "table") {
    if (static_cast<int>(table.size()) != grid.size()) {
      fail(fmt::format("table profile has {} values, grid has {}", table.size(), grid.size()));
    }
    return Eigen::Map<const RealField>(table.data(), grid.size());
  }
  fail("profile '" + kind + "' cannot be sampled directly");
}

std::optional<DopingProfile> DopingSpec::build(const Grid& grid, double mass) const {
  if (kind == "none") return std::nullopt;
  if (kind == "uniform") return DopingProfile::uniform(grid, m0 ? *m0 : mass);
  if (static_cast<int>(table.size()) != grid.size()) {
    fail(fmt::format("doping table has {} values, grid has {}", table.size(), grid.size()));
  }
  return DopingProfile{Eigen::Map<const RealField>(table.data(), grid.size())};
}

EOS ExperimentConfig::eos() const {
  if (eos_family == "zero") return EOS::zero();
  if (eos_family == "gamma_law") return EOS::gamma_law(gamma);
  if (eos_family == "centered_power") return EOS::centered_power(eos_power, eos_m0);
  fail("unknown EOS family '" + eos_family + "'");
}

int ExperimentConfig::record_every(double step) const {
  const long steps = std::lround(t_final / step);
  return static_cast<int>(std::max(1L, std::lround(static_cast<double>(steps) / samples)));
}

ExperimentConfig parse_config(const Json& doc) {
  ExperimentConfig c;
  c.raw = doc;
  require_object(doc, "config",
                 {"experiment", "solver", "grid", "time", "tau", "taus", "rescaled", "eos", "doping",
                  "initial", "floor", "c1", "integrator", "cfl", "parallelism", "seed", "qdd",
                  "decay", "layer", "validate"});
  read(doc, "experiment", c.experiment, "config");
  if (c.experiment != "simulate" && c.experiment != "sweep" && c.experiment != "decay" &&
      c.experiment != "layer" && c.experiment != "validate") {
    fail("unknown experiment '" + c.experiment + "'");
  }
  read(doc, "solver", c.solver, "config");
  if (c.solver != "sl" && c.solver != "qhd" && c.solver != "qdd") {
    fail("unknown solver '" + c.solver + "'");
  }
  if (doc.contains("grid")) {
    require_object(doc["grid"], "grid", {"n"});
    read(doc["grid"], "n", c.n, "grid");
  }
  if (doc.contains("time")) {
    const Json& t = doc["time"];
    require_object(t, "time", {"dt", "t_final", "samples"});
    read(t, "dt", c.dt, "time");
    read(t, "t_final", c.t_final, "time");
    read(t, "samples", c.samples, "time");
  }
  read(doc, "tau", c.tau, "config");
  read(doc, "taus", c.taus, "config");
  read(doc, "rescaled", c.rescaled, "config");
  if (doc.contains("eos")) {
    const Json& e = doc["eos"];
    require_object(e, "eos", {"family", "gamma", "n", "M0"});
    read(e, "family", c.eos_family, "eos");
    read(e, "gamma", c.gamma, "eos");
    read(e, "n", c.eos_power, "eos");
    read(e, "M0", c.eos_m0, "eos");
  }
  if (doc.contains("doping")) {
    const Json& d = doc["doping"];
    require_object(d, "doping", {"type", "M0", "values"});
    read(d, "type", c.doping.kind, "doping");
    if (d.contains("M0")) c.doping.m0 = get<double>(d, "M0", "doping");
    read(d, "values", c.doping.table, "doping");
    if (c.doping.kind != "uniform" && c.doping.kind != "table" && c.doping.kind != "none") {
      fail("unknown doping type '" + c.doping.kind + "'");
    }
  }
  c.rho0 = ProfileSpec{"constant", 1.0, 0.0, 1, {}};
  c.v0 = ProfileSpec{"constant", 0.0, 0.0, 1, {}};
  if (doc.contains("initial")) {
    const Json& i = doc["initial"];
    require_object(i, "initial", {"rho", "v", "s_star"});
    if (i.contains("rho")) c.rho0 = parse_profile(i["rho"], "initial.rho");
    if (i.contains("v")) c.v0 = parse_profile(i["v"], "initial.v");
    read(i, "s_star", c.s_star, "initial");
    if (c.rho0.kind == "well_prepared") fail("initial.rho cannot be well_prepared");
  }
  if (doc.contains("floor")) c.floor = get<double>(doc, "floor", "config");
  if (doc.contains("c1")) c.c1 = get<double>(doc, "c1", "config");
  read(doc, "integrator", c.integrator, "config");
  read(doc, "cfl", c.cfl, "config");
  read(doc, "parallelism", c.parallelism, "config");
  read(doc, "seed", c.seed, "config");
  if (doc.contains("qdd")) {
    const Json& q = doc["qdd"];
    require_object(q, "qdd", {"dt", "tol", "max_iter"});
    if (q.contains("dt")) c.qdd.dt = get<double>(q, "dt", "qdd");
    read(q, "tol", c.qdd.tol, "qdd");
    read(q, "max_iter", c.qdd.max_iter, "qdd");
  }
  if (doc.contains("decay")) {
    const Json& d = doc["decay"];
    require_object(d, "decay", {"c1", "transient_fraction", "noise_floor", "tau_regime_max"});
    read(d, "c1", c.decay.c1, "decay");
    read(d, "transient_fraction", c.decay.transient_fraction, "decay");
    read(d, "noise_floor", c.decay.noise_floor, "decay");
    read(d, "tau_regime_max", c.decay.tau_regime_max, "decay");
  }
  c.layer.ill_v = ProfileSpec{"constant", 0.0, 0.0, 1, {}};
  if (doc.contains("layer")) {
    const Json& l = doc["layer"];
    require_object(l, "layer", {"t_check", "ill_v"});
    read(l, "t_check", c.layer.t_check, "layer");
    if (l.contains("ill_v")) c.layer.ill_v = parse_profile(l["ill_v"], "layer.ill_v");
  }
  if (doc.contains("validate")) {
    const Json& v = doc["validate"];
    require_object(v, "validate", {"levels"});
    if (v.contains("levels")) {
      c.levels.clear();
      for (const Json& level : v["levels"]) {
        if (!level.is_array() || level.size() != 2) fail("validate.levels entries are [n, dt]");
        c.levels.emplace_back(level[0].get<int>(), level[1].get<double>());
      }
    }
  }

  if (c.n < 8 || c.n % 2 != 0) fail("grid.n must be even and at least 8");
  if (!(c.dt > 0.0)) fail("time.dt must be positive");
  if (!(c.t_final >= 0.0)) fail("time.t_final must be nonnegative");
  if (c.samples < 1) fail("time.samples must be positive");
  if (!(c.tau > 0.0)) fail("tau must be positive");
  for (size_t i = 0; i < c.taus.size(); ++i) {
    if (!(c.taus[i] > 0.0)) fail("taus must be positive");
    if (i > 0 && !(c.taus[i] < c.taus[i - 1])) fail("taus must be strictly decreasing");
  }
  if (c.parallelism < 1) fail("parallelism must be at least 1");
  if (c.floor && !(*c.floor >= 0.0)) fail("floor must be nonnegative");
  for (const auto& [n, dt] : c.levels) {
    if (n < 8 || n % 2 != 0 || !(dt > 0.0)) fail("validate.levels need even n >= 8 and dt > 0");
  }
  try {
    (void)c.eos();
  } catch (const Error& e) {
    fail(e.detail());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(fmt::format("{}: {}", path, e.what()));
  }
  return parse_config(doc);
}

}  // namespace qhd
