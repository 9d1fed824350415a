#include "pmp/run_config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "pmp/error.hpp"

namespace pmp {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::Config, "run file field '" + field + "': " + why);
}

double positive(const json& v, const std::string& field) {
  if (!v.is_number()) bad(field, "must be a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) bad(field, "must be positive");
  return x;
}

Vec to_vec(const json& v, const std::string& field) {
  if (v.is_number()) return Vec::Constant(1, v.get<double>());
  if (!v.is_array() || v.empty()) bad(field, "must be a number or a nonempty array of numbers");
  Vec out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(field, "entries must be numbers");
    out[static_cast<Index>(i)] = v[i].get<double>();
  }
  return out;
}

json from_vec(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

struct TolField {
  const char* name;
  double Tolerances::*member;
};

constexpr TolField kTolFields[] = {
    {"mp", &Tolerances::mp},         {"tc", &Tolerances::tc},
    {"si", &Tolerances::si},         {"sl", &Tolerances::sl},
    {"nn", &Tolerances::nn},         {"ae", &Tolerances::ae},
    {"ch_rel", &Tolerances::ch_rel}, {"hderiv_rel", &Tolerances::hderiv_rel},
    {"nz_rel", &Tolerances::nz_rel}, {"act", &Tolerances::act},
};

const char* const kKeys[] = {"problem", "params",       "control",      "checks",     "tolerances",
                             "seed",    "grid_step",    "needle_times", "tube_radius", "diagnostics"};

}  // namespace

RunConfig parse_run_json(const json& j) {
  if (!j.is_object()) bad("<root>", "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(kKeys), std::end(kKeys), it.key()) == std::end(kKeys)) {
      bad(it.key(), "unknown key");
    }
  }
  RunConfig cfg;
  if (!j.contains("problem") || !j["problem"].is_string()) bad("problem", "required string");
  cfg.problem = j["problem"].get<std::string>();
  const RegistryInfo& info = registry_info(cfg.problem);

  if (j.contains("params")) {
    if (!j["params"].is_object()) bad("params", "must be an object");
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
      if (!info.defaults.count(it.key())) bad("params." + it.key(), "not a parameter of '" + cfg.problem + "'");
      if (!it.value().is_number()) bad("params." + it.key(), "must be a number");
      cfg.params[it.key()] = it.value().get<double>();
    }
  }

  if (!j.contains("control")) bad("control", "required");
  const json& c = j["control"];
  if (c.is_string()) {
    cfg.control.name = c.get<std::string>();
  } else if (c.is_object()) {
    for (auto it = c.begin(); it != c.end(); ++it) {
      if (it.key() != "breakpoints" && it.key() != "values") bad("control." + it.key(), "unknown key");
    }
    if (!c.contains("breakpoints") || !c["breakpoints"].is_array()) bad("control.breakpoints", "required array");
    if (!c.contains("values") || !c["values"].is_array()) bad("control.values", "required array");
    for (const auto& b : c["breakpoints"]) {
      if (!b.is_number()) bad("control.breakpoints", "entries must be numbers");
      cfg.control.breakpoints.push_back(b.get<double>());
    }
    for (const auto& v : c["values"]) cfg.control.values.push_back(to_vec(v, "control.values"));
    if (cfg.control.values.size() + 1 != cfg.control.breakpoints.size()) {
      bad("control.values", "length must be len(breakpoints) - 1");
    }
  } else {
    bad("control", "must be a registry control name or {breakpoints, values}");
  }

  if (j.contains("checks")) {
    if (!j["checks"].is_array()) bad("checks", "must be an array");
    for (const auto& t : j["checks"]) {
      const auto cond = t.is_string() ? condition_from_string(t.get<std::string>()) : std::nullopt;
      if (!cond) bad("checks", "unknown condition " + t.dump());
      cfg.checks.push_back(*cond);
    }
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) bad("tolerances", "must be an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      bool known = false;
      for (const auto& f : kTolFields) {
        if (it.key() == f.name) {
          cfg.tolerances.*f.member = positive(it.value(), "tolerances." + it.key());
          known = true;
        }
      }
      if (!known) bad("tolerances." + it.key(), "unknown tolerance");
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("seed", "must be a nonnegative integer");
    const auto s = j["seed"].get<std::uint64_t>();
    if (s > std::numeric_limits<unsigned>::max()) bad("seed", "too large");
    cfg.seed = static_cast<unsigned>(s);
  }
  if (j.contains("grid_step")) cfg.grid_step = positive(j["grid_step"], "grid_step");
  if (j.contains("tube_radius")) cfg.tube_radius = positive(j["tube_radius"], "tube_radius");
  if (j.contains("needle_times")) {
    if (!j["needle_times"].is_number_integer() || j["needle_times"].get<long>() <= 0) {
      bad("needle_times", "must be a positive integer");
    }
    cfg.needle_times = j["needle_times"].get<int>();
  }
  if (j.contains("diagnostics")) {
    if (!j["diagnostics"].is_boolean()) bad("diagnostics", "must be a boolean");
    cfg.diagnostics = j["diagnostics"].get<bool>();
  }
  // Fail early on unknown control names and bad params.
  if (!cfg.control.name.empty()) make_control(cfg.problem, cfg.control.name, cfg.params);
  return cfg;
}

RunConfig parse_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read run file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, "run file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_json(j);
}

json run_to_json(const RunConfig& cfg) {
  json j;
  j["problem"] = cfg.problem;
  json params = json::object();
  for (const auto& [k, v] : cfg.params) params[k] = v;
  j["params"] = params;
  if (cfg.control.name.empty()) {
    json vals = json::array();
    for (const auto& v : cfg.control.values) vals.push_back(from_vec(v));
    j["control"] = {{"breakpoints", cfg.control.breakpoints}, {"values", vals}};
  } else {
    j["control"] = cfg.control.name;
  }
  json checks = json::array();
  for (Condition c : cfg.checks) checks.push_back(to_string(c));
  j["checks"] = checks;
  json tol = json::object();
  for (const auto& f : kTolFields) tol[f.name] = cfg.tolerances.*f.member;
  j["tolerances"] = tol;
  j["seed"] = cfg.seed;
  if (cfg.grid_step) j["grid_step"] = *cfg.grid_step;
  if (cfg.tube_radius) j["tube_radius"] = *cfg.tube_radius;
  j["needle_times"] = cfg.needle_times;
  j["diagnostics"] = cfg.diagnostics;
  return j;
}

std::string fingerprint(const RunConfig& cfg) {
  const std::string s = run_to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

json report_to_json(const Report& r, const RunConfig& cfg) {
  json j;
  j["schema"] = "pmp-report/1";
  j["fingerprint"] = fingerprint(cfg);
  j["problem"] = r.problem;
  j["control"] = r.control;
  j["form"] = r.bolza ? "bolza" : "mayer";
  j["pass"] = r.pass;

  json verdicts = json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back({{"condition", to_string(v.condition)},
                        {"status", to_string(v.status)},
                        {"pass", v.pass},
                        {"residual", v.residual},
                        {"tolerance", v.tolerance},
                        {"detail", v.detail}});
  }
  j["verdicts"] = verdicts;

  if (r.multipliers) {
    const auto& m = *r.multipliers;
    j["multipliers"] = {{"lambda", from_vec(m.lambda)}, {"mu", from_vec(m.mu)},
                        {"nu", from_vec(m.nu)},         {"normalized", m.normalized},
                        {"feasible", m.feasible},       {"violation", m.violation},
                        {"feasible_patterns", m.feasible_patterns}};
  } else {
    j["multipliers"] = nullptr;
  }

  const auto& sp = r.sample_plan;
  j["sample_plan"] = {{"size", sp.zetas.size()},
                      {"vertices", sp.vertices},
                      {"lattice_per_axis", sp.lattice_per_axis},
                      {"random", sp.random},
                      {"seed", sp.seed}};

  const auto& d = r.diagnostics;
  json diag = {{"needle_count", d.needle_count},
               {"refinement_rounds", d.refinement_rounds},
               {"needles_at_corner", d.needles_at_corner},
               {"resolvent_condition", d.resolvent_condition},
               {"dynamics_residual", d.dynamics_residual},
               {"r4", d.r4},
               {"notes", d.notes}};
  if (d.contraction) {
    const auto& c = *d.contraction;
    diag["contraction"] = {{"L", c.L},         {"r", c.r},
                           {"r1", c.r1},       {"r2", c.r2},
                           {"rho", c.rho},     {"k", c.k},
                           {"gamma", std::isfinite(c.gamma) ? json(c.gamma) : json("inf")},
                           {"bound", c.bound}, {"measured_ratio", c.measured_ratio},
                           {"a_norm", c.a_norm}, {"iterations", c.iterations}};
  }
  if (d.expansion) {
    const auto& e = *d.expansion;
    diag["expansion"] = {{"scalings", e.scalings},
                         {"remainders", e.remainders},
                         {"remainder_over_scale", e.remainder_over_scale},
                         {"order_estimate", e.order_estimate}};
  }
  j["diagnostics"] = diag;

  json tol = json::object();
  for (const auto& f : kTolFields) tol[f.name] = cfg.tolerances.*f.member;
  j["tolerances"] = tol;

  json errs = json::array();
  for (const auto& e : r.errors) {
    errs.push_back({{"stage", e.stage}, {"kind", e.kind}, {"message", e.message}, {"fatal", e.fatal}});
  }
  j["errors"] = errs;
  return j;
}

void write_contraction_csv(std::ostream& os, const PicardTrace& trace) {
  os << "iterate,bielecki_residual,ratio\n";
  os << std::setprecision(17);
  const auto& res = trace.bielecki_residuals;
  for (std::size_t i = 0; i < res.size(); ++i) {
    os << i << ',' << res[i] << ',';
    if (i > 0 && res[i - 1] > 0.0) os << res[i] / res[i - 1];
    os << '\n';
  }
}

void write_expansion_csv(std::ostream& os, const ExpansionReport& rep) {
  os << "scale,remainder,remainder_over_scale\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < rep.scalings.size(); ++i) {
    os << rep.scalings[i] << ',' << rep.remainders[i] << ',' << rep.remainder_over_scale[i] << '\n';
  }
}

}  // namespace pmp
