#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "fracmod/h0.hpp"
#include "fracmod/test_functions.hpp"
#include "fracmod/young.hpp"

namespace fracmod {

enum class PlanMethod { tensor, monte_carlo };

// Integrator configuration for J_{s,G}. The near field (|h| < far_cutoff) is
// integrated, by default, in the substituted variable rho = r^{1-s}, which
// absorbs the (1-s) factor exactly and keeps the family well-conditioned
// uniformly in s; a plain graded mesh in r is retained as an independent
// cross-check (use_rho_substitution = false).
struct SamplingPlan {
  PlanMethod method = PlanMethod::tensor;

  // tensor outer mesh: uniform core on [-2R,2R]^n plus geometric wing panels
  int core_panels = 12;
  int core_gl = 6;
  int x_wing_levels = 10;  // explicit domain reaches 2R * 2^levels
  int wing_gl = 4;

  // Monte Carlo
  long long samples = 200000;
  std::uint64_t seed = 1;

  int sphere_order = 0;  // 0 = per-dim default

  // near field
  bool use_rho_substitution = true;
  int resolve_levels = 30;  // dyadic-in-r zone above r_cut = fc * 2^-resolve_levels
  int radial_levels = 40;   // dyadic-in-rho zone (substituted) / full r-depth (plain)
  int radial_gl = 8;

  // far field
  double far_cutoff = 1.0;
  int far_extra_levels = 12;  // doublings past |x| + R before the analytic tail
  int far_gl = 6;

  double tail_tol_rel = 1e-2;  // gate: certified truncation bounds vs computed value
  int threads = 0;

  void validate() const;
};

SamplingPlan default_tensor_plan(int dim);
SamplingPlan default_mc_plan(int dim, long long samples, std::uint64_t seed);

struct ModularResult {
  double value = 0;       // J_{s,G}(u), unscaled
  double near_field = 0;  // I1: |h| < far_cutoff
  double far_field = 0;   // I2: |h| >= far_cutoff
  double tail_bound = 0;  // certified truncation bound on the unscaled value
  double scaled = 0;      // (1-s) J_{s,G}(u)
  double scaled_tail_bound = 0;
  std::optional<double> mc_stderr;         // stderr of value
  std::optional<double> mc_scaled_stderr;  // stderr of scaled
};

// Lambda-reusable quadrature representation: geometry (weights, quotients,
// sample points) is spec-independent, so one profile serves every Young spec
// and every scaling u/lambda (quotients scale exactly).
struct ModularProfile {
  int dim = 1;
  double s = 0.5;
  double one_minus_s = 0.5;
  double far_cutoff = 1.0;
  bool near_scaled = true;  // near weights already carry the (1-s) factor
  bool aniso = false;
  int axis = -1;
  double tail_tol_rel = 1e-2;

  // terms: weight, quotient, packed coordinates (dim-strided)
  std::vector<double> near_w, near_q, near_x, near_y;
  std::vector<double> far_w, far_q, far_x, far_y;

  // radial truncation data
  double rho_end = 0;  // substituted path: unresolved rho below this
  double r_end = 0;    // plain path: unresolved r below this
  std::vector<std::array<double, 2>> near_tail;  // {x-weight, quotient scale c}
  std::vector<std::array<double, 3>> far_tail;   // {x-weight, |u(x)|, r_max}
  double mc_far_rmax = 0;                        // MC far tail evaluated against Mu
  double sphere_total = 0;                       // n*omega_n, or 2 for the directional case

  // outer-domain truncation: explicit region reaches X (box halfwidth)
  double X = 0;
  double box_axis = 0;  // aniso: support halfwidth along the axis
  std::vector<double> mu_w, mu_v;  // support samples of |u| for Mu(lambda)

  bool is_mc = false;
  struct BlockRange {
    std::size_t begin, end;
    int stratum;
    bool near;
  };
  std::vector<BlockRange> mc_blocks;

  std::size_t term_count() const { return near_w.size() + far_w.size(); }
};

ModularProfile build_modular_profile(const TestFunction& u, double s, const SamplingPlan& plan);
ModularProfile build_aniso_profile(const TestFunction& u, double s, int axis,
                                   const SamplingPlan& plan);

// Per-spec coefficient extraction (a(x_i,y_i), p(x_i,y_i) where applicable).
struct SpecTerms {
  YoungKind kind = YoungKind::power;
  double pexp = 0, qexp = 0;
  GrowthBounds bounds;
  std::vector<double> a_near, a_far, p_near, p_far;
  const YoungSpec* spec = nullptr;
};

SpecTerms extract_spec_terms(const YoungSpec& spec, const ModularProfile& profile);

// Evaluates the modular of u/lambda on a prebuilt profile. Never throws on
// tail bounds; callers gate.
ModularResult eval_modular_profile(const ModularProfile& profile, const SpecTerms& terms,
                                   double inv_lambda = 1.0, int threads = 0);

// One-call entry points (tensor plans stream when the term count is large;
// Monte Carlo plans build block profiles). Tail bounds above
// plan.tail_tol_rel * value raise TailBoundError.
ModularResult modular_Js(const YoungSpec& spec, const TestFunction& u, double s,
                         const SamplingPlan& plan);
double scaled_modular(const YoungSpec& spec, const TestFunction& u, double s,
                      const SamplingPlan& plan);
ModularResult modular_aniso(const YoungSpec& spec, const TestFunction& u, double s, int axis,
                            const SamplingPlan& plan);

// Analytic far-field ceiling (monotonicity + convexity + the growth window),
// for far_cutoff = 1: C2 * 2^{p+} * max(||u||^p-, ||u||^p+) * n*omega_n / s.
double far_field_pointwise_bound(const YoungSpec& spec, const TestFunction& u, double s);

}  // namespace fracmod
