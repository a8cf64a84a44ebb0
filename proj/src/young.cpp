#include "fracmod/young.hpp"

#include <algorithm>
#include <sstream>

namespace fracmod {

void GrowthBounds::validate() const {
  if (!(1.0 < p_minus) || !(p_minus <= p_plus) || !std::isfinite(p_plus))
    throw std::invalid_argument("GrowthBounds: need 1 < p- <= p+ < inf");
  if (!(0.0 < c1) || !(c1 <= c2) || !std::isfinite(c2))
    throw std::invalid_argument("GrowthBounds: need 0 < C1 <= C2 < inf");
}

std::string FieldDesc::to_string() const {
  std::ostringstream os;
  os << name;
  char sep = '(';
  for (const auto& [k, v] : params) {
    os << sep << k << '=' << v;
    sep = ',';
  }
  if (sep == ',') os << ')';
  return os.str();
}

ScalarField ScalarField::constant(double value) {
  if (value <= 0) throw std::invalid_argument("ScalarField::constant: value must be positive");
  return ScalarField(Kind::constant, value, 0, 0, value, value,
                     FieldDesc{"constant", {{"value", value}}});
}

ScalarField ScalarField::smooth_bump(double base, double amplitude, double radius) {
  if (base <= 0 || radius <= 0)
    throw std::invalid_argument("ScalarField::smooth_bump: base and radius must be positive");
  if (base + std::min(0.0, amplitude) <= 0)
    throw std::invalid_argument("ScalarField::smooth_bump: field must stay positive");
  double lo = std::min(base, base + amplitude);
  double hi = std::max(base, base + amplitude);
  return ScalarField(Kind::smooth_bump, base, amplitude, radius, lo, hi,
                     FieldDesc{"smooth-bump-modulated",
                               {{"base", base}, {"amplitude", amplitude}, {"radius", radius}}});
}

ScalarField ScalarField::distance_clip(double base, double lo, double hi) {
  if (!(0 < lo && lo <= hi)) throw std::invalid_argument("ScalarField::distance_clip: bad clip");
  return ScalarField(Kind::distance_clip, base, lo, hi, lo, hi,
                     FieldDesc{"distance-clip", {{"base", base}, {"lo", lo}, {"hi", hi}}});
}

ScalarField ScalarField::from_desc(const FieldDesc& d) {
  auto get = [&](const std::string& key, double dflt, bool required = false) {
    for (const auto& [k, v] : d.params)
      if (k == key) return v;
    if (required) throw std::invalid_argument("ScalarField: missing parameter " + key);
    return dflt;
  };
  if (d.name == "constant") return constant(get("value", 1.0));
  if (d.name == "smooth-bump-modulated")
    return smooth_bump(get("base", 1.0), get("amplitude", 0.5), get("radius", 1.0));
  if (d.name == "distance-clip")
    return distance_clip(get("base", 0.0, true), get("lo", 0.0, true), get("hi", 0.0, true));
  throw std::invalid_argument("ScalarField: unknown field '" + d.name + "'");
}

YoungSpec YoungSpec::power(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("YoungSpec::power: p must exceed 1");
  YoungSpec s;
  s.kind_ = YoungKind::power;
  s.p_ = p;
  s.bounds_ = {p, p, 1.0, 1.0};
  std::ostringstream os;
  os << "power(p=" << p << ")";
  s.id_ = os.str();
  return s;
}

YoungSpec YoungSpec::power_log(double p, ScalarField a) {
  if (!(p > 1.0)) throw std::invalid_argument("YoungSpec::power_log: p must exceed 1");
  YoungSpec s;
  s.kind_ = YoungKind::power_log;
  s.p_ = p;
  // t g/G = p + (1 + p log+ t)/(log+ t + 1) - p ... lands in [p, p+1]:
  // t <= 1 gives exactly p, t -> 1+ gives p+1, decreasing back to p at infinity.
  s.bounds_ = {p, p + 1.0, a.lo(), a.hi()};
  s.kinks_ = {1.0};  // density jump where log+ switches on
  std::ostringstream os;
  os << "power-log(p=" << p << ",a=" << a.desc().to_string() << ")";
  s.id_ = os.str();
  s.a_ = std::move(a);
  return s;
}

YoungSpec YoungSpec::double_phase(double q, double p, ScalarField a) {
  if (!(1.0 < q && q <= p)) throw std::invalid_argument("YoungSpec::double_phase: need 1<q<=p");
  YoungSpec s;
  s.kind_ = YoungKind::double_phase;
  s.q_ = q;
  s.p_ = p;
  // t g/G is a weighted mean of q and p; G(.,.,1) = 1 + a
  s.bounds_ = {q, p, 1.0 + a.lo(), 1.0 + a.hi()};
  std::ostringstream os;
  os << "double-phase(q=" << q << ",p=" << p << ",a=" << a.desc().to_string() << ")";
  s.id_ = os.str();
  s.a_ = std::move(a);
  return s;
}

YoungSpec YoungSpec::variable_exponent(ScalarField p_field, ScalarField a) {
  if (!(p_field.lo() > 1.0))
    throw std::invalid_argument("YoungSpec::variable_exponent: exponent field must stay > 1");
  YoungSpec s;
  s.kind_ = YoungKind::variable_exponent;
  s.bounds_ = {p_field.lo(), p_field.hi(), a.lo(), a.hi()};
  std::ostringstream os;
  os << "variable-exponent(p=" << p_field.desc().to_string() << ",a=" << a.desc().to_string()
     << ")";
  s.id_ = os.str();
  s.pf_ = std::move(p_field);
  s.a_ = std::move(a);
  return s;
}

YoungSpec YoungSpec::space_free(std::string name, std::function<double(double)> A,
                                std::function<double(double)> dA, GrowthBounds declared,
                                std::vector<double> kinks) {
  declared.validate();
  YoungSpec s;
  s.kind_ = YoungKind::space_free;
  s.A_ = std::move(A);
  s.dA_ = std::move(dA);
  s.bounds_ = declared;
  s.kinks_ = std::move(kinks);
  s.id_ = "space-free(" + name + ")";
  return s;
}

double eval_G(const YoungSpec& s, std::span<const double> x, std::span<const double> y,
              double t) {
  return s.G(x, y, t);
}

double eval_g(const YoungSpec& s, std::span<const double> x, std::span<const double> y,
              double t) {
  return s.g(x, y, t);
}

double eval_G_bar(const YoungSpec& s, std::span<const double> x, double t) {
  return s.G_bar(x, t);
}

double complementary(const YoungSpec& s, std::span<const double> x, std::span<const double> y,
                     double t) {
  if (t < 0) throw std::domain_error("complementary: negative argument");
  if (t == 0) return 0.0;
  // Expand until g(hi) >= t. g -> infinity by property (iii); a bounded
  // density would loop forever, so cap and signal the violated hypothesis.
  double hi = 1.0;
  while (s.g(x, y, hi) < t) {
    hi *= 2.0;
    if (!std::isfinite(hi) || hi > 1e300)
      throw ContractViolation("complementary: density failed to exceed the slope (property iii)");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (s.g(x, y, mid) < t ? lo : hi) = mid;
  }
  // supremum attained where the density crosses t (jumps land on hi)
  double w = hi;
  return std::max(0.0, t * w - s.G(x, y, w));
}

namespace {

double rel_excess(double lhs, double rhs, double scale) {
  // positive iff lhs > rhs beyond round-off, relative to the given scale
  return (lhs - rhs) / std::max({std::abs(scale), std::abs(rhs), 1e-300});
}

double grid_complementary(const YoungSpec& s, std::span<const double> x,
                          std::span<const double> y, double t) {
  // brute-force sup of t w - G(w): coarse logarithmic sweep to locate the
  // maximizer's decade, then a fine linear grid around it
  double w_hi = 1.0;
  while (s.g(x, y, w_hi) < t && w_hi < 1e15) w_hi *= 2.0;
  double w_lo = w_hi * 1e-9;
  const int N = 2000;
  double best = 0.0, best_w = 0.0;
  double ratio = std::pow(w_hi / w_lo, 1.0 / N);
  double w = w_lo;
  for (int i = 0; i <= N; ++i, w *= ratio) {
    double v = t * w - s.G(x, y, w);
    if (v > best) {
      best = v;
      best_w = w;
    }
  }
  if (best_w > 0) {
    double a = best_w / ratio, b = best_w * ratio;
    for (int i = 0; i <= N; ++i) {
      double wi = a + (b - a) * i / N;
      best = std::max(best, t * wi - s.G(x, y, wi));
    }
  }
  return best;
}

}  // namespace

bool StructureReport::pass(double tol_closed, double tol_transform) const {
  return unit_bounds <= tol_closed && growth_window <= tol_closed && scaling <= tol_closed &&
         power_bound <= tol_closed && convexity <= tol_closed &&
         conjugate_bound <= tol_transform &&
         young <= tol_transform && complementary_grid <= tol_transform &&
         field_continuity <= tol_transform;
}

std::string StructureReport::summary() const {
  std::ostringstream os;
  os << "unit-bounds " << unit_bounds << " | growth " << growth_window << " | scaling "
     << scaling << " | power-bound " << power_bound << " | conjugate " << conjugate_bound
     << " | young " << young << " | convexity "
     << convexity << " | complementary " << complementary_grid << " | y-continuity "
     << field_continuity << " (" << samples << " samples)";
  return os.str();
}

StructureReport verify_structure(const YoungSpec& s, const StructureSamples& plan) {
  const GrowthBounds& gb = s.bounds();
  SplitMix64 rng(plan.seed);
  StructureReport rep;
  rep.samples = plan.count;
  const double llo = std::log(plan.t_lo), lhi = std::log(plan.t_hi);
  auto log_uniform = [&] { return std::exp(rng.uniform(llo, lhi)); };

  Point xp{}, yp{}, yp2{};
  for (int it = 0; it < plan.count; ++it) {
    for (int d = 0; d < plan.dim; ++d) {
      xp[d] = rng.uniform(-plan.box, plan.box);
      yp[d] = rng.uniform(-plan.box, plan.box);
    }
    std::span<const double> x(xp.data(), plan.dim), y(yp.data(), plan.dim);
    double t = log_uniform();
    double a = log_uniform();
    double b = log_uniform();

    double G1 = s.G(x, y, 1.0);
    rep.unit_bounds =
        std::max({rep.unit_bounds, rel_excess(gb.c1, G1, G1), rel_excess(G1, gb.c2, G1)});

    double Gt = s.G(x, y, t);
    double gt = s.g(x, y, t);
    if (Gt > 0) {
      double ratio = t * gt / Gt;
      rep.growth_window = std::max({rep.growth_window, gb.p_minus - ratio, ratio - gb.p_plus});
    }

    // two-sided power-scaling chain for G(ab) against G(b)
    double Gb = s.G(x, y, b);
    double Gab = s.G(x, y, a * b);
    double apm = std::pow(a, gb.p_minus), app = std::pow(a, gb.p_plus);
    rep.scaling = std::max({rep.scaling, rel_excess(std::min(apm, app) * Gb, Gab, Gab),
                            rel_excess(Gab, std::max(apm, app) * Gb, Gab)});

    double bpm = std::pow(b, gb.p_minus), bpp = std::pow(b, gb.p_plus);
    rep.power_bound =
        std::max({rep.power_bound, rel_excess(gb.c1 * std::min(bpm, bpp), Gb, Gb),
                  rel_excess(Gb, gb.c2 * std::max(bpm, bpp), Gb)});

    // complementary-function identities (numeric transform)
    double Gcomp_gt = complementary(s, x, y, gt);
    rep.conjugate_bound =
        std::max(rep.conjugate_bound, rel_excess(Gcomp_gt, gb.p_plus * Gt, gb.p_plus * Gt));

    double Gcomp_b = complementary(s, x, y, b);
    double Ga = s.G(x, y, a);
    rep.young = std::max(rep.young, rel_excess(a * b, Ga + Gcomp_b, a * b));

    double t2 = log_uniform();
    double mid = s.G(x, y, 0.5 * (t + t2));
    double avg = 0.5 * (s.G(x, y, t) + s.G(x, y, t2));
    rep.convexity = std::max(rep.convexity, rel_excess(mid, avg, avg));

    // brute-force oracle on a subset (the grid sup is expensive)
    if (it % 37 == 0) {
      double via_grid = grid_complementary(s, x, y, b);
      double rel = std::abs(Gcomp_b - via_grid) /
                   std::max({std::abs(Gcomp_b), std::abs(via_grid), 1e-12});
      rep.complementary_grid = std::max(rep.complementary_grid, rel);
    }

    // sampled modulus of continuity in y at shrinking offsets
    double range = std::max(1.0, s.G(x, y, 2.0));
    for (double delta : {1e-3}) {
      for (int d = 0; d < plan.dim; ++d) yp2[d] = yp[d];
      yp2[0] += delta;
      double osc = std::abs(s.G(x, std::span<const double>(yp2.data(), plan.dim), 2.0) -
                            s.G(x, y, 2.0));
      rep.field_continuity = std::max(rep.field_continuity, osc / range - 0.05);
    }
  }
  return rep;
}

}  // namespace fracmod
