#include "fracmod/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "fracmod/kernels.hpp"

namespace fracmod {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

StudyConfig StudyConfig::parse_text(const std::string& text) {
  StudyConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) cfg.kv[key] = value;
  }
  return cfg;
}

StudyConfig StudyConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_text(os.str());
}

std::string StudyConfig::get(const std::string& key, const std::string& dflt) const {
  auto it = kv.find(key);
  return it == kv.end() ? dflt : it->second;
}

double StudyConfig::get_double(const std::string& key, double dflt) const {
  auto it = kv.find(key);
  return it == kv.end() ? dflt : std::stod(it->second);
}

long long StudyConfig::get_int(const std::string& key, long long dflt) const {
  auto it = kv.find(key);
  return it == kv.end() ? dflt : std::stoll(it->second);
}

bool StudyConfig::get_flag(const std::string& key, bool dflt) const {
  auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  const std::string& v = it->second;
  return v == "on" || v == "true" || v == "1" || v == "yes";
}

std::vector<double> StudyConfig::get_grid(const std::string& key,
                                          const std::vector<double>& dflt) const {
  auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  std::vector<double> out;
  std::istringstream is(it->second);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::string StudyConfig::canonical() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
  return os.str();
}

std::string StudyConfig::hash() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

namespace {

ScalarField field_from_config(const StudyConfig& cfg, const std::string& prefix,
                              const std::string& default_name, double default_base,
                              double default_amp) {
  std::string name = cfg.get(prefix, default_name);
  if (name == "constant")
    return ScalarField::constant(cfg.get_double(prefix + ".value", default_base));
  if (name == "smooth-bump-modulated")
    return ScalarField::smooth_bump(cfg.get_double(prefix + ".base", default_base),
                                    cfg.get_double(prefix + ".amplitude", default_amp),
                                    cfg.get_double(prefix + ".radius", 1.0));
  if (name == "distance-clip")
    return ScalarField::distance_clip(cfg.get_double(prefix + ".base", default_base),
                                      cfg.get_double(prefix + ".lo", default_base),
                                      cfg.get_double(prefix + ".hi", default_base + 1.0));
  throw std::invalid_argument("config: unknown field '" + name + "' at " + prefix);
}

}  // namespace

YoungSpec spec_from_config(const StudyConfig& cfg) {
  std::string kind = cfg.get("spec", "power");
  if (kind == "power") return YoungSpec::power(cfg.get_double("spec.p", 2.0));
  if (kind == "power-log")
    return YoungSpec::power_log(cfg.get_double("spec.p", 2.0),
                                field_from_config(cfg, "spec.a", "constant", 1.0, 0.5));
  if (kind == "double-phase")
    return YoungSpec::double_phase(
        cfg.get_double("spec.q", 2.0), cfg.get_double("spec.p", 3.0),
        field_from_config(cfg, "spec.a", "smooth-bump-modulated", 1.0, 0.5));
  if (kind == "variable-exponent")
    return YoungSpec::variable_exponent(
        field_from_config(cfg, "spec.pfield", "smooth-bump-modulated", 2.0, 0.5),
        field_from_config(cfg, "spec.a", "constant", 1.0, 0.5));
  throw std::invalid_argument("config: unknown spec kind '" + kind + "'");
}

SamplingPlan plan_from_config(const StudyConfig& cfg, int dim) {
  std::string method = cfg.get("plan.method", "tensor");
  SamplingPlan p;
  if (method == "mc" || method == "monte-carlo") {
    p = default_mc_plan(dim, cfg.get_int("plan.samples", 200000),
                        static_cast<std::uint64_t>(cfg.get_int("seed", 1)));
  } else if (method == "tensor") {
    p = default_tensor_plan(dim);
  } else {
    throw std::invalid_argument("config: unknown plan.method '" + method + "'");
  }
  p.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(p.seed)));
  p.core_panels = static_cast<int>(cfg.get_int("plan.core_panels", p.core_panels));
  p.core_gl = static_cast<int>(cfg.get_int("plan.core_gl", p.core_gl));
  p.x_wing_levels = static_cast<int>(cfg.get_int("plan.x_wing_levels", p.x_wing_levels));
  p.wing_gl = static_cast<int>(cfg.get_int("plan.wing_gl", p.wing_gl));
  p.sphere_order = static_cast<int>(cfg.get_int("plan.sphere_order", p.sphere_order));
  p.resolve_levels = static_cast<int>(cfg.get_int("plan.resolve_levels", p.resolve_levels));
  p.radial_levels = static_cast<int>(cfg.get_int("plan.radial_levels", p.radial_levels));
  p.radial_gl = static_cast<int>(cfg.get_int("plan.radial_gl", p.radial_gl));
  p.far_cutoff = cfg.get_double("plan.far_cutoff", p.far_cutoff);
  p.far_extra_levels = static_cast<int>(cfg.get_int("plan.far_extra_levels", p.far_extra_levels));
  p.far_gl = static_cast<int>(cfg.get_int("plan.far_gl", p.far_gl));
  p.use_rho_substitution = cfg.get_flag("plan.rho_substitution", p.use_rho_substitution);
  p.tail_tol_rel = cfg.get_double("plan.tail_tol", p.tail_tol_rel);
  p.threads = static_cast<int>(cfg.get_int("plan.threads", p.threads));
  return p;
}

namespace {

std::vector<double> default_s_grid() { return {0.90, 0.95, 0.99, 0.995, 0.999}; }

void finalize_rows(StudyResult& r) {
  int viol = 0;
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (r.rows[i].rel_err > r.rows[i - 1].rel_err) ++viol;
  r.monotone_violations = viol;
  // least-squares slope of log(rel_err) against log(1-s)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const StudyRow& row : r.rows) {
    if (row.rel_err <= 0 || row.s >= 1.0) continue;
    double X = std::log(1.0 - row.s), Y = std::log(row.rel_err);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    ++n;
  }
  r.fitted_rate = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
}

struct LimitColumn {
  double value = 0;
  double dual_path_max_rel = 0;
};

// grad_energy with the family's closed-form density; optionally cross-checked
// against the generic sphere x radial quadrature on random support points.
LimitColumn bbm_limit(const YoungSpec& spec, const TestFunction& u, bool dual_check,
                      std::uint64_t seed) {
  LimitColumn out;
  H0Evaluator ev = make_h0_evaluator(spec, u.dim);
  BoxQuad quad = box_quadrature(u, 12, 6);
  out.value = grad_energy(ev, u, quad);
  if (dual_check && ev.variant != H0Variant::generic) {
    H0Evaluator gen = make_h0_evaluator(spec, u.dim, H0Variant::generic, 0);
    SplitMix64 rng(seed);
    for (int i = 0; i < 50; ++i) {
      Point x{};
      for (int d = 0; d < u.dim; ++d) x[d] = rng.uniform(-1.0, 1.0) * u.support_box[d];
      double t = std::exp(rng.uniform(std::log(1e-2), std::log(1e2)));
      std::span<const double> xs(x.data(), u.dim);
      double closed = h0_eval(ev, xs, t);
      double generic = h0_eval_generic(gen, xs, t);
      double rel = std::abs(closed - generic) / std::max({closed, generic, 1e-300});
      out.dual_path_max_rel = std::max(out.dual_path_max_rel, rel);
    }
  }
  return out;
}

double aniso_limit(const YoungSpec& spec, const TestFunction& u, int axis) {
  BoxQuad quad = box_quadrature(u, 12, 6);
  std::vector<double> parts(quad.nodes.size());
  parallel_for(quad.nodes.size(), [&](std::size_t b, std::size_t e) {
    double g[kMaxDim];
    for (std::size_t i = b; i < e; ++i) {
      std::span<const double> x(quad.nodes[i].data(), u.dim);
      u.gradient(x, std::span<double>(g, u.dim));
      double t = std::abs(g[axis]);
      if (t == 0) {
        parts[i] = 0;
        continue;
      }
      parts[i] = quad.weights[i] * (h0_aniso_has_closed_form(spec)
                                        ? h0_aniso_closed(spec, x, t)
                                        : h0_aniso(spec, x, t));
    }
  });
  return kernels::pairwise_sum(parts);
}

StudyResult run_limit_study(const StudyConfig& cfg, const std::string& kind, int axis,
                            bool dual_check) {
  auto t0 = std::chrono::steady_clock::now();
  StudyResult r;
  r.kind = kind;
  r.config = cfg.kv;
  r.version = kArtifactVersion;
  int dim = static_cast<int>(cfg.get_int("dim", 1));
  YoungSpec spec = spec_from_config(cfg);
  TestFunction u = bank_member(dim, cfg.get("fn", "cosbump"));
  SamplingPlan plan = plan_from_config(cfg, dim);
  std::vector<double> s_grid = cfg.get_grid("s_grid", default_s_grid());
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > 0.0 && s_grid[i] < 1.0))
      throw std::invalid_argument("config: s_grid values must lie in (0,1)");
    if (i > 0 && !(s_grid[i] > s_grid[i - 1]))
      throw std::invalid_argument("config: s_grid must be strictly increasing");
  }
  r.informational = !u.smooth;

  LimitColumn limit{0, 0};
  if (u.sup_u > 0) {
    if (axis >= 0)
      limit.value = aniso_limit(spec, u, axis);
    else
      limit = bbm_limit(spec, u, dual_check, static_cast<std::uint64_t>(cfg.get_int("seed", 1)));
  }
  r.limit_value = limit.value;
  r.dual_path_max_rel = limit.dual_path_max_rel;

  // rows run concurrently; each integration is internally deterministic
  std::vector<std::future<StudyRow>> futs;
  for (double s : s_grid) {
    futs.push_back(std::async(std::launch::async, [&, s] {
      auto row_t0 = std::chrono::steady_clock::now();
      StudyRow row;
      row.s = s;
      ModularResult m = axis >= 0 ? modular_aniso(spec, u, s, axis, plan)
                                  : modular_Js(spec, u, s, plan);
      row.scaled_modular = m.scaled;
      row.limit = limit.value;
      row.abs_err = std::abs(m.scaled - limit.value);
      row.rel_err = limit.value != 0 ? row.abs_err / std::abs(limit.value) : row.abs_err;
      row.tail_bound = m.scaled_tail_bound;
      row.stderr_ = m.mc_scaled_stderr.value_or(0.0);
      row.wall_ms = wall_ms_since(row_t0);
      return row;
    }));
  }
  for (auto& f : futs) r.rows.push_back(f.get());
  finalize_rows(r);
  r.total_wall_ms = wall_ms_since(t0);
  return r;
}

}  // namespace

StudyResult run_bbm_study(const StudyConfig& cfg) {
  return run_limit_study(cfg, "bbm", -1, true);
}

StudyResult run_aniso_study(const StudyConfig& cfg) {
  int dim = static_cast<int>(cfg.get_int("dim", 1));
  int axis = static_cast<int>(cfg.get_int("axis", 1));  // 1-based
  if (axis < 1 || axis > dim) throw std::invalid_argument("aniso: axis must be in [1, dim]");
  StudyConfig cfg2 = cfg;
  StudyResult r = run_limit_study(cfg2, "aniso", axis - 1, false);
  return r;
}

StudyResult run_norm_study(const StudyConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  StudyResult r;
  r.kind = "norms";
  r.config = cfg.kv;
  r.version = kArtifactVersion;
  int dim = static_cast<int>(cfg.get_int("dim", 1));
  YoungSpec spec = spec_from_config(cfg);
  TestFunction u = bank_member(dim, cfg.get("fn", "cosbump"));
  SamplingPlan plan = plan_from_config(cfg, dim);
  std::vector<double> s_grid = cfg.get_grid("s_grid", default_s_grid());
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > 0.0 && s_grid[i] < 1.0))
      throw std::invalid_argument("config: s_grid values must lie in (0,1)");
    if (i > 0 && !(s_grid[i] > s_grid[i - 1]))
      throw std::invalid_argument("config: s_grid must be strictly increasing");
  }
  r.informational = !u.smooth;

  NormQuery query;
  query.rel_tol = cfg.get_double("norm_tol", 1e-8);
  std::vector<NormStudyRow> rows = norm_inequality_study(spec, u, s_grid, plan, query);
  r.limit_value = rows.empty() ? 0.0 : rows.front().grad_norm;
  for (const NormStudyRow& nr : rows) {
    StudyRow row;
    row.s = nr.s;
    row.scaled_modular = nr.seminorm_scaled;  // [[u]]_{s,G}
    row.limit = nr.grad_norm;                 // ||grad u||_{H0}
    row.abs_err = nr.seminorm_scaled - nr.grad_norm;
    row.rel_err = nr.ratio;                   // ratio column for norm studies
    row.tail_bound = 0;
    row.stderr_ = 0;
    row.wall_ms = 0;
    r.rows.push_back(row);
  }
  r.total_wall_ms = wall_ms_since(t0);
  return r;
}

StudyResult run_example_suite(const std::string& which, StudyConfig cfg) {
  if (which == "doublephase") {
    cfg.set("spec", "double-phase");
    if (!cfg.has("spec.q")) cfg.set("spec.q", "2");
    if (!cfg.has("spec.p")) cfg.set("spec.p", "3");
    if (!cfg.has("spec.a")) cfg.set("spec.a", "smooth-bump-modulated");
  } else if (which == "log") {
    cfg.set("spec", "power-log");
    if (!cfg.has("spec.p")) cfg.set("spec.p", "2");
  } else if (which == "varexp") {
    cfg.set("spec", "variable-exponent");
    if (!cfg.has("spec.pfield")) cfg.set("spec.pfield", "smooth-bump-modulated");
  } else {
    throw std::invalid_argument("examples: unknown suite '" + which + "'");
  }
  StudyResult r = run_limit_study(cfg, "example-" + which, -1, true);
  return r;
}

StudyResult run_study(const StudyConfig& cfg) {
  std::string kind = cfg.get("study", "bbm");
  if (kind == "bbm") return run_bbm_study(cfg);
  if (kind == "aniso") return run_aniso_study(cfg);
  if (kind == "norms") return run_norm_study(cfg);
  if (kind == "example-doublephase") return run_example_suite("doublephase", cfg);
  if (kind == "example-log") return run_example_suite("log", cfg);
  if (kind == "example-varexp") return run_example_suite("varexp", cfg);
  throw std::invalid_argument("config: unknown study kind '" + kind + "'");
}

bool PropertyReport::all_ok() const {
  for (const PropertyCheck& c : checks)
    if (!c.ok) return false;
  return true;
}

std::string PropertyReport::summary() const {
  std::ostringstream os;
  for (const PropertyCheck& c : checks)
    os << (c.ok ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
  return os.str();
}

PropertyReport run_property_suite(std::uint64_t seed, bool inject_corrupted) {
  PropertyReport rep;
  auto add = [&](const std::string& name, bool ok, const std::string& detail) {
    rep.checks.push_back({name, ok, detail});
  };

  // built-in spec family used across the suite
  std::vector<YoungSpec> specs;
  specs.push_back(YoungSpec::power(2.0));
  specs.push_back(YoungSpec::power(3.0));
  specs.push_back(
      YoungSpec::double_phase(2.0, 3.0, ScalarField::smooth_bump(1.0, 0.5, 1.0)));
  specs.push_back(YoungSpec::power_log(2.0, ScalarField::constant(1.0)));
  specs.push_back(YoungSpec::variable_exponent(ScalarField::smooth_bump(2.0, 0.5, 1.0),
                                               ScalarField::constant(1.0)));
  if (inject_corrupted)
    specs.push_back(YoungSpec::power(2.0).with_bounds({1.5, 1.5, 1.0, 1.0}));

  for (const YoungSpec& s : specs) {
    StructureSamples plan;
    plan.count = 1000;
    plan.seed = seed;
    StructureReport sr = verify_structure(s, plan);
    add("structure " + s.id(), sr.pass(), sr.summary());
  }

  // negative control: a deliberately wrong declared p+ must fail (H3)
  {
    YoungSpec bad = YoungSpec::power(2.0).with_bounds({1.5, 1.5, 1.0, 1.0});
    StructureSamples plan;
    plan.count = 200;
    plan.seed = seed;
    StructureReport sr = verify_structure(bad, plan);
    add("negative control (wrong p+)", sr.growth_window > 1e-6,
        "growth-window slack " + std::to_string(sr.growth_window) + " (expected positive)");
  }

  // sphere moments against the Gamma closed form
  {
    double worst = 0;
    for (int n = 1; n <= 3; ++n) {
      SphereRule rule = sphere_rule(n, n == 2 ? 20000 : 48);
      for (double kappa : {1.5, 2.0, 3.0, 4.7}) {
        double via_rule = moment_K(n, kappa, rule);
        double closed = moment_K_closed(n, kappa);
        worst = std::max(worst, std::abs(via_rule - closed) / closed);
      }
    }
    add("sphere moments vs closed form", worst <= 1e-8, "max rel " + std::to_string(worst));
  }

  // sandwich constants bracket the generic quadrature, all families
  {
    double worst = -1;
    SplitMix64 rng(seed + 1);
    for (const YoungSpec& s : specs) {
      H0Evaluator gen = make_h0_evaluator(s, 1, H0Variant::generic);
      auto [lower, upper] = sandwich_constants(s.bounds(), 1, gen.rule);
      for (int i = 0; i < 1000; ++i) {
        Point x{rng.uniform(-1.5, 1.5), 0, 0};
        double t = std::exp(rng.uniform(std::log(1e-2), std::log(1e2)));
        std::span<const double> xs(x.data(), 1);
        double h0 = h0_eval_generic(gen, xs, t);
        double gbar = s.G_bar(xs, t);
        worst = std::max({worst, lower * gbar - h0, h0 - upper * gbar});
      }
    }
    add("sandwich bounds (prop constants)", worst <= 1e-6,
        "max signed slack " + std::to_string(worst));
  }

  // closed forms against generic quadrature, 50 samples per family
  {
    double worst = 0;
    SplitMix64 rng(seed + 2);
    for (std::size_t k = 1; k < specs.size(); ++k) {  // skip power(2)'s twin power(3)
      const YoungSpec& s = specs[k];
      H0Evaluator closed = make_h0_evaluator(s, 1);
      H0Evaluator gen = make_h0_evaluator(s, 1, H0Variant::generic);
      if (closed.variant == H0Variant::generic) continue;
      for (int i = 0; i < 50; ++i) {
        Point x{rng.uniform(-1.5, 1.5), 0, 0};
        double t = std::exp(rng.uniform(std::log(1e-2), std::log(1e2)));
        std::span<const double> xs(x.data(), 1);
        double a = h0_eval(closed, xs, t);
        double b = h0_eval_generic(gen, xs, t);
        worst = std::max(worst, std::abs(a - b) / std::max({a, b, 1e-300}));
      }
    }
    add("limit density dual path", worst <= 1e-6, "max rel " + std::to_string(worst));
  }

  // the limit density is itself a Young function: nondecreasing density
  {
    YoungSpec s = YoungSpec::double_phase(2.0, 3.0, ScalarField::smooth_bump(1.0, 0.5, 1.0));
    H0Evaluator ev = make_h0_evaluator(s, 2);
    Point x{0.2, -0.1, 0};
    std::span<const double> xs(x.data(), 2);
    bool ok = true;
    double prev_slope = 0;
    double t_prev = 0, h_prev = 0;
    for (int i = 1; i <= 40; ++i) {
      double t = 0.2 * i;
      double h = h0_eval(ev, xs, t);
      double slope = (h - h_prev) / (t - t_prev);
      if (slope < prev_slope * (1.0 - 1e-9)) ok = false;
      prev_slope = slope;
      t_prev = t;
      h_prev = h;
    }
    add("limit density convex increasing", ok, "finite-difference density monotone");
  }

  return rep;
}

// ---------------------------------------------------------------------------
// serialization & emission

namespace {

json row_to_json(const StudyRow& r) {
  return json{{"s", r.s},
              {"scaled_modular", r.scaled_modular},
              {"limit", r.limit},
              {"abs_err", r.abs_err},
              {"rel_err", r.rel_err},
              {"tail_bound", r.tail_bound},
              {"stderr", r.stderr_},
              {"wall_ms", r.wall_ms}};
}

StudyRow row_from_json(const json& j) {
  StudyRow r;
  r.s = j.at("s");
  r.scaled_modular = j.at("scaled_modular");
  r.limit = j.at("limit");
  r.abs_err = j.at("abs_err");
  r.rel_err = j.at("rel_err");
  r.tail_bound = j.at("tail_bound");
  r.stderr_ = j.at("stderr");
  r.wall_ms = j.at("wall_ms");
  return r;
}

}  // namespace

bool StudyResult::operator==(const StudyResult& other) const {
  if (kind != other.kind || rows.size() != other.rows.size() ||
      limit_value != other.limit_value || fitted_rate != other.fitted_rate ||
      monotone_violations != other.monotone_violations ||
      informational != other.informational ||
      dual_path_max_rel != other.dual_path_max_rel ||
      total_wall_ms != other.total_wall_ms || config != other.config ||
      version != other.version)
    return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const StudyRow &a = rows[i], &b = other.rows[i];
    if (a.s != b.s || a.scaled_modular != b.scaled_modular || a.limit != b.limit ||
        a.abs_err != b.abs_err || a.rel_err != b.rel_err || a.tail_bound != b.tail_bound ||
        a.stderr_ != b.stderr_ || a.wall_ms != b.wall_ms)
      return false;
  }
  return true;
}

std::string study_to_json(const StudyResult& r) {
  json j;
  j["version"] = r.version;
  j["kind"] = r.kind;
  j["limit_value"] = r.limit_value;
  j["fitted_rate"] = r.fitted_rate;
  j["monotone_violations"] = r.monotone_violations;
  j["informational"] = r.informational;
  j["dual_path_max_rel"] = r.dual_path_max_rel;
  j["total_wall_ms"] = r.total_wall_ms;
  j["config"] = r.config;
  j["rows"] = json::array();
  for (const StudyRow& row : r.rows) j["rows"].push_back(row_to_json(row));
  return j.dump(2);
}

StudyResult study_from_json(const std::string& text) {
  json j = json::parse(text);
  StudyResult r;
  r.version = j.at("version");
  r.kind = j.at("kind");
  r.limit_value = j.at("limit_value");
  r.fitted_rate = j.at("fitted_rate");
  r.monotone_violations = j.at("monotone_violations");
  r.informational = j.at("informational");
  r.dual_path_max_rel = j.at("dual_path_max_rel");
  r.total_wall_ms = j.at("total_wall_ms");
  r.config = j.at("config").get<std::map<std::string, std::string>>();
  for (const json& row : j.at("rows")) r.rows.push_back(row_from_json(row));
  return r;
}

std::string result_basename(const StudyResult& r) {
  StudyConfig cfg;
  cfg.kv = r.config;
  return r.kind + "-" + cfg.hash().substr(0, 8);
}

std::vector<std::string> emit_csv(const StudyResult& r, const std::string& dir) {
  fs::create_directories(dir);
  std::string path = (fs::path(dir) / (result_basename(r) + ".csv")).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot write " + path);
  out << "s,scaled_modular,limit,abs_err,rel_err,tail_bound,stderr,wall_ms\n";
  for (const StudyRow& row : r.rows) {
    out << fmt_double(row.s) << ',' << fmt_double(row.scaled_modular) << ','
        << fmt_double(row.limit) << ',' << fmt_double(row.abs_err) << ','
        << fmt_double(row.rel_err) << ',' << fmt_double(row.tail_bound) << ','
        << fmt_double(row.stderr_) << ',' << fmt_double(row.wall_ms) << "\n";
  }
  return {path};
}

std::vector<std::string> emit_json(const StudyResult& r, const std::string& dir) {
  fs::create_directories(dir);
  std::string path = (fs::path(dir) / (result_basename(r) + ".json")).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot write " + path);
  out << study_to_json(r) << "\n";
  return {path};
}

std::vector<std::string> emit_plot(const StudyResult& r, const std::string& dir) {
  fs::create_directories(dir);
  std::string base = result_basename(r);
  std::string path = (fs::path(dir) / (base + ".gnuplot")).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot write " + path);
  out << "# gnuplot script: relative error against (1-s), log-log\n"
      << "set datafile separator ','\n"
      << "set logscale xy\n"
      << "set xlabel '1-s'\n"
      << "set ylabel 'relative error'\n"
      << "set key left top\n"
      << "plot '" << base << ".csv' every ::1 using (1.0-$1):5 with linespoints"
      << " title '" << r.kind << "'\n";
  return {path};
}

std::optional<StudyResult> cache_lookup(const StudyConfig& cfg, const std::string& dir) {
  fs::path path = fs::path(dir) / ".cache" / (cfg.hash() + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  StudyResult r = study_from_json(os.str());
  r.cache_hit = true;
  return r;
}

void cache_store(const StudyConfig& cfg, const StudyResult& r, const std::string& dir) {
  fs::path cdir = fs::path(dir) / ".cache";
  fs::create_directories(cdir);
  fs::path tmp = cdir / (cfg.hash() + ".tmp");
  fs::path final = cdir / (cfg.hash() + ".json");
  {
    std::ofstream out(tmp, std::ios::binary);
    out << study_to_json(r) << "\n";
  }
  fs::rename(tmp, final);  // atomic publish
}

StudyResult run_study_cached(const StudyConfig& cfg) {
  std::string dir = cfg.get("out", "results");
  bool use_cache = cfg.get_flag("cache", true);
  if (use_cache) {
    if (auto hit = cache_lookup(cfg, dir)) return *hit;
  }
  StudyResult r = run_study(cfg);
  if (use_cache) cache_store(cfg, r, dir);
  return r;
}

}  // namespace fracmod
