#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fracmod/core.hpp"

namespace fracmod {

// Declared growth data: exponent window of t*g/G and the bounds on G(x,y,1).
struct GrowthBounds {
  double p_minus = 2.0;
  double p_plus = 2.0;
  double c1 = 1.0;
  double c2 = 1.0;

  void validate() const;
};

// Serializable description of a coefficient/exponent field.
struct FieldDesc {
  std::string name;
  std::vector<std::pair<std::string, double>> params;

  std::string to_string() const;
};

// Closed registry of spatial fields a(x,y) / p(x,y): positive, bounded,
// continuous in y. Arbitrary code-valued fields are deliberately not
// representable so specs stay serializable.
class ScalarField {
 public:
  static ScalarField constant(double value);
  // base + amplitude * (1 - |y/radius|^2)^3_+   (modulation in y only)
  static ScalarField smooth_bump(double base, double amplitude, double radius);
  // clamp(base + |x-y|, lo, hi)
  static ScalarField distance_clip(double base, double lo, double hi);
  static ScalarField from_desc(const FieldDesc&);

  double operator()(std::span<const double> x, std::span<const double> y) const {
    switch (kind_) {
      case Kind::constant:
        return p0_;
      case Kind::smooth_bump: {
        double r2 = 0;
        for (double v : y) r2 += v * v;
        r2 /= p2_ * p2_;
        if (r2 >= 1.0) return p0_;
        double b = 1.0 - r2;
        return p0_ + p1_ * (b * b * b);
      }
      case Kind::distance_clip: {
        double d2 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          double dv = x[i] - y[i];
          d2 += dv * dv;
        }
        double v = p0_ + std::sqrt(d2);
        return v < p1_ ? p1_ : (v > p2_ ? p2_ : v);
      }
    }
    return p0_;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const FieldDesc& desc() const { return desc_; }

 private:
  enum class Kind { constant, smooth_bump, distance_clip };
  ScalarField(Kind k, double p0, double p1, double p2, double lo, double hi, FieldDesc d)
      : kind_(k), p0_(p0), p1_(p1), p2_(p2), lo_(lo), hi_(hi), desc_(std::move(d)) {}

  Kind kind_;
  double p0_, p1_, p2_;
  double lo_, hi_;
  FieldDesc desc_;
};

enum class YoungKind { power, power_log, double_phase, variable_exponent, space_free };

// A generalized Young function G(x,y,t) = int_0^t g(x,y,s) ds from the closed
// family of built-in forms, with its declared growth bounds attached.
//   power:             G = t^p
//   power_log:         G = a(x,y) t^p (log+(t) + 1)
//   double_phase:      G = t^q + a(x,y) t^p,  q <= p
//   variable_exponent: G = a(x,y) t^{p(x,y)}
//   space_free:        G = A(t) for a scalar Young function A
class YoungSpec {
 public:
  static YoungSpec power(double p);
  static YoungSpec power_log(double p, ScalarField a);
  static YoungSpec double_phase(double q, double p, ScalarField a);
  static YoungSpec variable_exponent(ScalarField p_field, ScalarField a);
  static YoungSpec space_free(std::string name, std::function<double(double)> A,
                              std::function<double(double)> dA, GrowthBounds declared,
                              std::vector<double> kinks = {});

  YoungKind kind() const { return kind_; }
  const GrowthBounds& bounds() const { return bounds_; }
  const std::string& id() const { return id_; }

  // Overriding the declared bounds produces a spec whose declarations may be
  // wrong on purpose; verify_structure validates declarations, not forms.
  YoungSpec with_bounds(GrowthBounds b) const {
    YoungSpec s = *this;
    s.bounds_ = b;
    return s;
  }

  double exponent() const { return p_; }        // power / power_log / double_phase upper
  double exponent_low() const { return q_; }    // double_phase lower
  const ScalarField& coefficient() const { return a_; }
  const ScalarField& exponent_field() const { return pf_; }
  double A_scalar(double t) const { return A_(t); }

  double G(std::span<const double> x, std::span<const double> y, double t) const {
    if (t < 0) throw std::domain_error("YoungSpec::G: negative argument");
    if (t == 0) return 0.0;
    switch (kind_) {
      case YoungKind::power:
        return pow_fast(t, p_);
      case YoungKind::power_log: {
        double lp = t > 1.0 ? std::log(t) : 0.0;
        return a_(x, y) * pow_fast(t, p_) * (lp + 1.0);
      }
      case YoungKind::double_phase:
        return pow_fast(t, q_) + a_(x, y) * pow_fast(t, p_);
      case YoungKind::variable_exponent:
        return a_(x, y) * std::pow(t, pf_(x, y));
      case YoungKind::space_free:
        return A_(t);
    }
    return 0.0;
  }

  // density g = dG/dt, right-continuous at kinks
  double g(std::span<const double> x, std::span<const double> y, double t) const {
    if (t < 0) throw std::domain_error("YoungSpec::g: negative argument");
    if (t == 0) return 0.0;
    switch (kind_) {
      case YoungKind::power:
        return p_ * pow_fast(t, p_ - 1.0);
      case YoungKind::power_log: {
        // d/dt [a t^p (log t + 1)] = a t^{p-1} (p log t + p + 1) for t > 1;
        // the kink at t = 1 takes the right branch (density right-continuous)
        if (t >= 1.0)
          return a_(x, y) * pow_fast(t, p_ - 1.0) * (p_ * std::log(t) + p_ + 1.0);
        return a_(x, y) * p_ * pow_fast(t, p_ - 1.0);
      }
      case YoungKind::double_phase:
        return q_ * pow_fast(t, q_ - 1.0) + a_(x, y) * p_ * pow_fast(t, p_ - 1.0);
      case YoungKind::variable_exponent: {
        double pv = pf_(x, y);
        return a_(x, y) * pv * std::pow(t, pv - 1.0);
      }
      case YoungKind::space_free:
        return dA_(t);
    }
    return 0.0;
  }

  double G_bar(std::span<const double> x, double t) const { return G(x, x, t); }
  double g_bar(std::span<const double> x, double t) const { return g(x, x, t); }

  // argument values where the density jumps (quadrature splits panels there)
  std::span<const double> kink_scales() const {
    return std::span<const double>(kinks_.data(), kinks_.size());
  }

  // diagonal coefficient / exponent, used by the closed-form limit functions
  double a_diag(std::span<const double> x) const { return a_(x, x); }
  double p_diag(std::span<const double> x) const {
    return kind_ == YoungKind::variable_exponent ? pf_(x, x) : p_;
  }

 private:
  YoungSpec() : a_(ScalarField::constant(1.0)), pf_(ScalarField::constant(2.0)) {}

  static double pow_fast(double t, double e) {
    if (e == 2.0) return t * t;
    if (e == 3.0) return (t * t) * t;
    if (e == 1.0) return t;
    return std::pow(t, e);
  }

  YoungKind kind_ = YoungKind::power;
  double p_ = 2.0, q_ = 2.0;
  ScalarField a_;
  ScalarField pf_;
  std::function<double(double)> A_, dA_;
  GrowthBounds bounds_;
  std::string id_;
  std::vector<double> kinks_;
};

double eval_G(const YoungSpec& s, std::span<const double> x, std::span<const double> y, double t);
double eval_g(const YoungSpec& s, std::span<const double> x, std::span<const double> y, double t);
double eval_G_bar(const YoungSpec& s, std::span<const double> x, double t);

// Complementary function  G~(x,y,t) = sup_{w>=0} (t w - G(x,y,w)),
// computed by monotone bisection on g(x,y,w) = t with an expanding bracket.
double complementary(const YoungSpec& s, std::span<const double> x, std::span<const double> y,
                     double t);

struct StructureSamples {
  int count = 1000;
  std::uint64_t seed = 42;
  int dim = 1;
  double box = 2.0;        // x,y sampled uniformly in [-box,box]^dim
  double t_lo = 1e-3;      // t, a, b sampled log-uniformly
  double t_hi = 1e3;
};

// Max observed signed violations (<= 0 means the property held on every
// sample; positive values quantify the worst breach, relative where the
// quantity has a scale).
struct StructureReport {
  double unit_bounds = -1;        // C1 <= G(x,y,1) <= C2
  double growth_window = -1;      // p- <= t g/G <= p+
  double scaling = -1;            // min/max{a^p+-} G(b) vs G(ab)   (both sides)
  double power_bound = -1;        // C1 min{b^p+-} <= G(b) <= C2 max{b^p+-}
  double conjugate_bound = -1;    // G~(g(t)) <= p+ G(t)
  double young = -1;              // ab <= G(a) + G~(b)
  double convexity = -1;          // midpoint convexity in t
  double complementary_grid = -1; // bisection transform vs brute-force grid sup
  double field_continuity = -1;   // sampled y-modulus of continuity at delta=1e-3
  int samples = 0;

  bool pass(double tol_closed = 1e-9, double tol_transform = 1e-6) const;
  std::string summary() const;
};

StructureReport verify_structure(const YoungSpec& s, const StructureSamples& plan);

}  // namespace fracmod
