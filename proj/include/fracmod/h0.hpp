#pragma once

#include <functional>
#include <utility>

#include "fracmod/sphere.hpp"
#include "fracmod/test_functions.hpp"
#include "fracmod/young.hpp"

namespace fracmod {

// H0(x,t) = int_0^1 int_{S^{n-1}} G(x,x,t|w_n|r) dS_w dr/r, the limit density
// of the scaled modulars. Evaluated either by sphere x radial quadrature
// (generic) or by the closed forms of the example families; the directional
// variant is 2 int_0^1 G(x,x,tr) dr/r.
enum class H0Variant {
  generic,
  closed_power,
  closed_double_phase,
  closed_log,
  closed_varexp,
};

struct H0Evaluator {
  YoungSpec spec;
  int dim = 1;
  SphereRule rule;
  H0Variant variant = H0Variant::generic;
  int radial_levels = 40;  // dyadic depth of the graded radial mesh
  int radial_gl = 8;
  double tail_tol = 1e-12;  // relative gate on the certified radial tail

  H0Evaluator(YoungSpec s, int d, SphereRule r, H0Variant v)
      : spec(std::move(s)), dim(d), rule(std::move(r)), variant(v) {}
};

int default_sphere_order(int dim);

// variant defaults to the family's closed form where one exists
H0Evaluator make_h0_evaluator(const YoungSpec& spec, int dim, int sphere_order = 0);
H0Evaluator make_h0_evaluator(const YoungSpec& spec, int dim, H0Variant variant,
                              int sphere_order = 0);

double h0_eval(const H0Evaluator& ev, std::span<const double> x, double t);

// Quadrature path regardless of the evaluator's variant (dual-route checks).
double h0_eval_generic(const H0Evaluator& ev, std::span<const double> x, double t);

// Closed forms, assembled node-by-node over the sphere rule so they share its
// discretization (and so the per-direction branch condition t|w_n| <=> 1 of
// the logarithmic family is honored exactly).
double h0_closed_power(double p, double t, const SphereRule& rule);
double h0_closed_double_phase(double q, double p, double a_diag, double t,
                              const SphereRule& rule);
double h0_closed_log(double a_diag, double p, double t, const SphereRule& rule);
// Grouped (printed) form, valid when every node is on the same branch:
// t <= 1 always; t > 1 only in n = 1 where |w_n| == 1.
double h0_closed_log_grouped(double a_diag, double p, int n, double t, const SphereRule& rule);
double h0_closed_varexp(double a_diag, double p_diag, double t, const SphereRule& rule);

// Directional limit density 2 int_0^1 G(x,x,tr) dr/r.
double h0_aniso(const YoungSpec& spec, std::span<const double> x, double t,
                int radial_levels = 40, int radial_gl = 8, double tail_tol = 1e-12);
double h0_aniso_closed(const YoungSpec& spec, std::span<const double> x, double t);
bool h0_aniso_has_closed_form(const YoungSpec& spec);

// Proof constants bracketing H0:  lower * Gbar <= H0 <= upper * Gbar,
// lower = (1/p+) int |w_n|^{p+} dS, upper = n omega_n / p-.
std::pair<double, double> sandwich_constants(const GrowthBounds& gb, int dim,
                                             const SphereRule& rule);

// Tensor quadrature nodes over the support box of u.
struct BoxQuad {
  int dim = 1;
  std::vector<Point> nodes;
  std::vector<double> weights;
};

BoxQuad box_quadrature(const TestFunction& u, int panels_per_dim, int gl_order);

// int H0(x, |grad u(x)|) dx over the support box (exact gradient metadata).
double grad_energy(const H0Evaluator& ev, const TestFunction& u, const BoxQuad& quad);

// Local modulars. The H0 entry point and grad_energy share one implementation
// so J_{1,H0}(|grad u|) == grad_energy identically.
double local_modular_gbar(const YoungSpec& spec, const TestFunction& u, const BoxQuad& quad);
double local_modular_h0(const H0Evaluator& ev,
                        const std::function<double(std::span<const double>)>& field,
                        const BoxQuad& quad);

}  // namespace fracmod
