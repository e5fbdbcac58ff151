#include "cilt/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cilt/chaos.hpp"
#include "cilt/correlators.hpp"
#include "cilt/defect.hpp"
#include "cilt/forms.hpp"
#include "cilt/params.hpp"
#include "cilt/parallel.hpp"
#include "cilt/segal.hpp"
#include "json.hpp"

namespace cilt {

namespace {

constexpr const char* kVersion = "cilt 0.1.0";

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

long long ConfigValue::as_int() const {
  size_t pos = 0;
  long long v = std::stoll(raw, &pos);
  if (pos != raw.size()) throw std::invalid_argument("not an integer: " + raw);
  return v;
}

long long ConfigValue::rat_num() const {
  return std::stoll(raw.substr(0, raw.find('/')));
}
long long ConfigValue::rat_den() const {
  return std::stoll(raw.substr(raw.find('/') + 1));
}

double ConfigValue::as_real() const {
  if (has_slash()) return (double)rat_num() / (double)rat_den();
  return std::stod(raw);
}

Complex ConfigValue::as_complex() const {
  // forms: "re", "re+imi", "re-imi"
  std::string s = trim(raw);
  if (!s.empty() && s.back() == 'i') {
    size_t split = s.find_last_of("+-");
    if (split != std::string::npos && split > 0) {
      const double re = std::stod(s.substr(0, split));
      const double im = std::stod(s.substr(split, s.size() - split - 1));
      return {re, im};
    }
  }
  return {std::stod(s), 0.0};
}

const ConfigValue& ExperimentConfig::at(const std::string& k) const {
  auto it = keys.find(k);
  if (it == keys.end())
    throw std::invalid_argument("missing config key: " + k);
  return it->second;
}

ConfigValue ExperimentConfig::get_or(const std::string& k,
                                     const std::string& fallback) const {
  auto it = keys.find(k);
  if (it != keys.end()) return it->second;
  return ConfigValue{fallback};
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  while (std::getline(is, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line without '=': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "experiment" && section.empty()) {
      cfg.experiment = value;
      continue;
    }
    if (key == "seed" && section.empty()) {
      cfg.seed = std::stoull(value);
      continue;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    cfg.keys[full] = ConfigValue{value};
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string RunRecord::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["library_version"] = library_version;
  j["wall_seconds"] = wall_seconds;
  nlohmann::json cfg;
  for (const auto& [k, v] : config_echo) cfg[k] = v.raw;
  j["config"] = cfg;
  nlohmann::json res;
  for (const auto& [name, e] : results) {
    nlohmann::json je;
    je["re"] = fmt_double(e.value.real());
    if (e.is_complex) je["im"] = fmt_double(e.value.imag());
    if (e.error > 0) je["error"] = fmt_double(e.error);
    je["provenance"] = e.provenance;
    res[name] = je;
  }
  j["results"] = res;
  return j.dump(2);
}

RunRecord RunRecord::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RunRecord r;
  r.experiment = j["experiment"];
  r.seed = j["seed"];
  r.library_version = j["library_version"];
  r.wall_seconds = j.value("wall_seconds", 0.0);
  for (auto& [k, v] : j["config"].items()) r.config_echo[k] = ConfigValue{v};
  for (auto& [name, je] : j["results"].items()) {
    Entry e;
    const double re = std::stod((std::string)je["re"]);
    double im = 0;
    if (je.contains("im")) {
      im = std::stod((std::string)je["im"]);
      e.is_complex = true;
    }
    e.value = {re, im};
    if (je.contains("error")) e.error = std::stod((std::string)je["error"]);
    e.provenance = je["provenance"];
    r.results[name] = e;
  }
  return r;
}

namespace {

void reject_unknown(const ExperimentConfig& cfg, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : cfg.keys)
    if (!allowed.count(k))
      throw std::invalid_argument("unknown config key: " + k);
}

ModelParams params_from(const ExperimentConfig& cfg) {
  const long long p = cfg.at("params.p").as_int();
  const long long q = cfg.at("params.q").as_int();
  const long long k = cfg.at("params.k").as_int();
  const Complex mu = cfg.get_or("params.mu", "1").as_complex();
  return derive_params(p, q, k, mu);
}

void add_entry(RunRecord& rec, const std::string& name, Complex v, double err,
               const std::string& prov, bool complex_valued = true) {
  RunRecord::Entry e;
  e.value = v;
  e.error = err;
  e.provenance = prov;
  e.is_complex = complex_valued;
  rec.results[name] = e;
}

void run_dozz(const ExperimentConfig& cfg, RunRecord& rec) {
  reject_unknown(cfg, {"params.p", "params.q", "params.k", "params.mu",
                       "charges.alpha1", "charges.alpha2", "charges.alpha3",
                       "numeric.s"});
  auto params = params_from(cfg);
  std::array<double, 3> alphas = {cfg.at("charges.alpha1").as_real(),
                                  cfg.at("charges.alpha2").as_real(),
                                  cfg.at("charges.alpha3").as_real()};
  const long long s = cfg.at("numeric.s").as_int();
  auto dz = imaginary_dozz(params, alphas, s);
  if (dz.singular) throw std::runtime_error("dozz: l-function pole");
  add_entry(rec, "dozz_value", dz.value, 0.0, "imaginary DOZZ closed form");
}

void run_df(const ExperimentConfig& cfg, RunRecord& rec) {
  reject_unknown(cfg, {"params.p", "params.q", "params.k", "params.mu",
                       "charges.alpha1", "charges.alpha2", "charges.w1",
                       "charges.w2", "numeric.s", "numeric.method",
                       "numeric.budget"});
  auto params = params_from(cfg);
  DfSpec spec;
  spec.s = cfg.at("numeric.s").as_int();
  spec.a1 = params.beta * cfg.at("charges.alpha1").as_real();
  spec.a2 = params.beta * cfg.at("charges.alpha2").as_real();
  spec.w1 = cfg.get_or("charges.w1", "0").as_int();
  spec.w2 = cfg.get_or("charges.w2", "0").as_int();
  spec.beta_sq = params.beta * params.beta;
  const std::string method = cfg.get_or("numeric.method", "quadrature").raw;
  const long long budget = cfg.get_or("numeric.budget", "0").as_int();
  auto est = df_integral(spec, params.mu,
                         method == "monte_carlo" ? DfMethod::monte_carlo
                                                 : DfMethod::quadrature,
                         budget, cfg.seed);
  add_entry(rec, "df_integral", est.value, est.std_error,
            method == "monte_carlo" ? "importance-sampled MC" : "graded quadrature");
}

void run_three_point(const ExperimentConfig& cfg, RunRecord& rec) {
  std::set<std::string> allowed = {"params.p", "params.q", "params.k",
                                   "params.mu", "geometry.metric",
                                   "numeric.budget"};
  for (int i = 1; i <= 3; ++i) {
    const std::string p = "insertions." + std::to_string(i);
    allowed.insert(p + "_re");
    allowed.insert(p + "_im");
    allowed.insert(p + "_alpha");
    allowed.insert(p + "_m");
    allowed.insert(p + "_tangent");
    allowed.insert(p + "_infinity");
  }
  reject_unknown(cfg, allowed);
  auto params = params_from(cfg);
  InsertionSet ins;
  for (int i = 1; i <= 3; ++i) {
    const std::string p = "insertions." + std::to_string(i);
    Insertion q;
    q.position = {cfg.get_or(p + "_re", "0").as_real(),
                  cfg.get_or(p + "_im", "0").as_real()};
    q.alpha = cfg.at(p + "_alpha").as_real();
    q.m = cfg.get_or(p + "_m", "0").as_int();
    q.tangent = cfg.get_or(p + "_tangent", "0").as_real();
    q.at_infinity = cfg.get_or(p + "_infinity", "0").as_int() != 0;
    ins.push_back(q);
  }
  const std::string metric = cfg.get_or("geometry.metric", "g0").raw;
  auto r = three_point(params, ins,
                       metric == "round" ? SphereMetricKind::round
                                         : SphereMetricKind::g0,
                       cfg.get_or("numeric.budget", "0").as_int(), cfg.seed);
  if (r.variant == ThreePointResult::Variant::invalid)
    throw std::runtime_error("three-point: " + r.reason);
  add_entry(rec, "ell", {(double)r.ell, 0}, 0, "selection rule", false);
  add_entry(rec, "structure_constant", r.structure_constant, r.quadrature_error,
            "2 pi R times the Coulomb-gas integral");
  add_entry(rec, "value", r.value, r.quadrature_error, "three-point assembly");
}

void run_gmc_moment(const ExperimentConfig& cfg, RunRecord& rec) {
  reject_unknown(cfg, {"geometry.tau_re", "geometry.tau_im", "numeric.beta",
                       "numeric.n_modes", "numeric.eps", "numeric.grid",
                       "numeric.samples", "numeric.oracle_grid"});
  const Complex tau{cfg.get_or("geometry.tau_re", "0").as_real(),
                    cfg.get_or("geometry.tau_im", "1").as_real()};
  const double beta = cfg.at("numeric.beta").as_real();
  const int n_modes = (int)cfg.get_or("numeric.n_modes", "128").as_int();
  const double eps = cfg.get_or("numeric.eps", "1/128").as_real();
  const int grid = (int)cfg.get_or("numeric.grid", "256").as_int();
  const int samples = (int)cfg.get_or("numeric.samples", "2000").as_int();
  const int ogrid = (int)cfg.get_or("numeric.oracle_grid", "192").as_int();
  auto mc = torus_second_moment_mc(tau, beta, n_modes, eps, grid, samples, cfg.seed);
  const double oracle = second_moment_oracle_torus(tau, beta, nullptr, nullptr, ogrid);
  add_entry(rec, "mc_estimate", mc.value, mc.std_error, "mode-sampler MC", false);
  add_entry(rec, "oracle", {oracle, 0}, 0, "deterministic double quadrature",
            false);
  add_entry(rec, "sigma_distance",
            {std::abs(mc.value.real() - oracle) / mc.std_error, 0}, 0,
            "|MC - oracle| in MC standard errors", false);
}

void run_defect(const ExperimentConfig& cfg, RunRecord& rec) {
  std::set<std::string> allowed = {"params.p", "params.q", "params.k",
                                   "params.mu", "numeric.s_moves",
                                   "numeric.ad_moves", "geometry.n_points"};
  const int n = (int)cfg.get_or("geometry.n_points", "4").as_int();
  for (int i = 1; i <= n; ++i) {
    const std::string p = "points." + std::to_string(i);
    allowed.insert(p + "_re");
    allowed.insert(p + "_im");
    allowed.insert(p + "_m");
    allowed.insert(p + "_tangent");
  }
  reject_unknown(cfg, allowed);
  auto params = params_from(cfg);
  InsertionSet ins;
  for (int i = 1; i <= n; ++i) {
    const std::string p = "points." + std::to_string(i);
    Insertion q;
    q.position = {cfg.at(p + "_re").as_real(), cfg.at(p + "_im").as_real()};
    q.m = cfg.at(p + "_m").as_int();
    q.tangent = cfg.get_or(p + "_tangent", "0").as_real();
    ins.push_back(q);
  }
  std::vector<Complex> pts;
  std::vector<long long> ms;
  for (auto& q : ins) {
    pts.push_back(q.position);
    ms.push_back(q.m);
  }
  auto form = magnetic_form_sphere(pts, ms, params.radius);
  auto surf = Surface::sphere_round();
  const Complex x0{-3.1, -2.3};
  auto g = build_canonical_graph(ins, params.radius, cfg.seed);
  const double base = regularized_curvature(surf, form, g, x0);
  double worst = 0;
  const int n_smoves = (int)cfg.get_or("numeric.s_moves", "20").as_int();
  for (int s = 0; s < n_smoves; ++s) {
    auto g2 = s_move(g, s % (int)g.arcs.size(), cfg.seed + 17 * s + 1);
    worst = std::max(worst,
                     std::abs(regularized_curvature(surf, form, g2, x0) - base));
  }
  add_entry(rec, "curvature", {base, 0}, 0, "regularized curvature integral",
            false);
  add_entry(rec, "max_s_move_deviation", {worst, 0}, 0,
            "graph invariance over random S-moves", false);
}

void run_glue(const ExperimentConfig& cfg, RunRecord& rec) {
  reject_unknown(cfg, {"geometry.q1", "geometry.q2", "numeric.n_modes",
                       "numeric.radius", "numeric.battery"});
  const double q1 = cfg.at("geometry.q1").as_real();
  const double q2 = cfg.at("geometry.q2").as_real();
  const int N = (int)cfg.get_or("numeric.n_modes", "64").as_int();
  const double R = cfg.get_or("numeric.radius", "3/2").as_real();
  const int nbat = (int)cfg.get_or("numeric.battery", "5").as_int();
  GlueBattery battery;
  CounterRng rng{cfg.seed, 77};
  for (int b = 0; b < nbat; ++b) {
    BoundaryField fo, fi;
    fo.c = 2.0 * rng.uniform(3 * b) - 1.0;
    fi.c = 2.0 * rng.uniform(3 * b + 1) - 1.0;
    fo.k = fi.k = b % 2;
    for (int n = 1; n <= N; ++n) {
      double g1, g2, g3, g4;
      rng.gaussian_pair(1000 * b + 2 * n, g1, g2);
      rng.gaussian_pair(1000 * b + 2 * n + 1, g3, g4);
      fo.modes.push_back(Complex(g1, g2) / (2.0 * std::sqrt((double)n)));
      fi.modes.push_back(Complex(g3, g4) / (2.0 * std::sqrt((double)n)));
    }
    battery.outer.push_back(fo);
    battery.inner.push_back(fi);
  }
  const double dev = glue_check(q1, q2, N, battery, R);
  add_entry(rec, "glue_deviation", {dev, 0}, 0,
            "worst relative deviation over the boundary battery", false);
  add_entry(rec, "mode_identity_deviation",
            {glue_mode_identity_deviation(q1, q2, N, {0.4, -0.2}, {0.1, 0.6}), 0},
            0, "per-mode coth-addition identity", false);
}

void run_self_glue(const ExperimentConfig& cfg, RunRecord& rec) {
  reject_unknown(cfg, {"geometry.q", "numeric.n_modes", "numeric.radius",
                       "numeric.n_sectors"});
  const double q = cfg.at("geometry.q").as_real();
  const int N = (int)cfg.get_or("numeric.n_modes", "64").as_int();
  const double R = cfg.get_or("numeric.radius", "3/2").as_real();
  const int ns = (int)cfg.get_or("numeric.n_sectors", "3").as_int();
  add_entry(rec, "winding_profile_deviation",
            {self_glue_torus_check(q, N, ns, R), 0}, 0,
            "traced weights vs torus instanton weights", false);
}

void run_instanton(const ExperimentConfig& cfg, RunRecord& rec) {
  reject_unknown(cfg, {"geometry.tau_re", "geometry.tau_im", "numeric.radius",
                       "numeric.cutoff"});
  const Complex tau{cfg.get_or("geometry.tau_re", "0").as_real(),
                    cfg.get_or("geometry.tau_im", "1").as_real()};
  const double R = cfg.at("numeric.radius").as_real();
  const int cutoff = (int)cfg.get_or("numeric.cutoff", "6").as_int();
  auto s = instanton_sum(tau, R, cutoff);
  add_entry(rec, "instanton_sum", {s.value, 0}, s.remainder,
            "truncated lattice sum with Gaussian tail bound", false);
}

void run_exp_moment(const ExperimentConfig& cfg, RunRecord& rec) {
  reject_unknown(cfg, {"numeric.mu", "numeric.beta", "numeric.samples",
                       "numeric.eps", "numeric.domain_radius"});
  auto p = exp_moment_probe(cfg.at("numeric.mu").as_real(),
                            cfg.at("numeric.beta").as_real(),
                            (int)cfg.get_or("numeric.samples", "400").as_int(),
                            cfg.get_or("numeric.eps", "1/32").as_real(),
                            cfg.get_or("numeric.domain_radius", "0.5").as_real(),
                            cfg.seed);
  add_entry(rec, "exp_moment", {p.estimate, 0}, p.std_error, "disc sampler MC",
            false);
  add_entry(rec, "bound_u", {p.u, 0}, 0, "quadrature of the kernel energy", false);
  add_entry(rec, "bound_v", {p.v, 0}, 0, "domain volume", false);
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  if (config.threads > 0) set_threads(config.threads);
  RunRecord rec;
  rec.experiment = config.experiment;
  rec.config_echo = config.keys;
  rec.seed = config.seed;
  rec.library_version = kVersion;

  if (config.experiment == "dozz")
    run_dozz(config, rec);
  else if (config.experiment == "df-integral")
    run_df(config, rec);
  else if (config.experiment == "three-point")
    run_three_point(config, rec);
  else if (config.experiment == "gmc-moment")
    run_gmc_moment(config, rec);
  else if (config.experiment == "defect-invariance")
    run_defect(config, rec);
  else if (config.experiment == "glue-annuli")
    run_glue(config, rec);
  else if (config.experiment == "self-glue")
    run_self_glue(config, rec);
  else if (config.experiment == "instanton-sum")
    run_instanton(config, rec);
  else if (config.experiment == "exp-moment")
    run_exp_moment(config, rec);
  else
    throw std::invalid_argument("unknown experiment: " + config.experiment);

  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!config.out_dir.empty()) {
    std::ofstream out(config.out_dir + "/" + config.experiment + "_record.json");
    out << rec.to_json() << "\n";
  }
  return rec;
}

CompareReport compare_records(const RunRecord& a, const RunRecord& b,
                              double tolerance) {
  CompareReport rep;
  std::ostringstream os;
  if (a.experiment != b.experiment) {
    rep.ok = false;
    os << "experiment mismatch: " << a.experiment << " vs " << b.experiment << "\n";
    rep.text = os.str();
    return rep;
  }
  for (const auto& [name, ea] : a.results) {
    auto it = b.results.find(name);
    if (it == b.results.end()) {
      rep.ok = false;
      os << name << ": missing in second record\n";
      continue;
    }
    const auto& eb = it->second;
    const double diff = std::abs(ea.value - eb.value);
    if (ea.error > 0 && eb.error > 0) {
      const double sigma = std::sqrt(ea.error * ea.error + eb.error * eb.error);
      const double dist = diff / sigma;
      os << name << ": sigma distance " << dist << "\n";
      if (dist > 3.0) {
        rep.ok = false;
        os << name << ": FAIL (beyond 3 sigma)\n";
      }
    } else {
      const double rel = diff / std::max({std::abs(ea.value), std::abs(eb.value), 1e-300});
      os << name << ": relative difference " << rel << "\n";
      if (rel > tolerance) {
        rep.ok = false;
        os << name << ": FAIL (tolerance " << tolerance << ")\n";
      }
    }
  }
  rep.text = os.str();
  return rep;
}

}  // namespace cilt
