#include "fracmod/modular.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracmod/kernels.hpp"
#include "fracmod/quad.hpp"

namespace fracmod {

namespace {

// Below this radius the difference quotient switches to its second-order
// Taylor form |grad u(x) . w| r^{1-s}: the floating-point cancellation in
// u(x)-u(x-rw) passes the Taylor remainder around r ~ 1e-8.
constexpr double kTaylorRadius = 1e-7;

struct NearNode {
  double r;         // radius (may underflow to 0 deep in the substituted zone)
  double rho;       // r^{1-s}
  double r_pow_ms;  // r^{-s} (unused on the Taylor branch)
  double w;         // radial weight; carries (1-s) on the substituted path
};

struct RadialLayout {
  std::vector<NearNode> near;
  bool scaled = true;  // near weights absorbed the (1-s) factor
  double rho_end = 0;  // substituted path: rho below this is certified analytically
  double r_end = 0;    // plain path: r below this is certified analytically
};

RadialLayout build_radial_layout(double s, const SamplingPlan& plan) {
  RadialLayout lay;
  const double fc = plan.far_cutoff;
  const double ln2 = std::log(2.0);
  const double oms = 1.0 - s;
  const GaussRule& gl = gauss_legendre(plan.radial_gl);

  if (plan.use_rho_substitution) {
    lay.scaled = true;
    // resolved zone: dyadic panels in r on [fc 2^-K, fc], Gauss-Legendre in
    // tau = log r; (1-s) dr/r = (1-s) dtau carried in the weight
    for (int k = 0; k < plan.resolve_levels; ++k) {
      double hi = std::log(fc) - k * ln2;
      double lo = hi - ln2;
      double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      for (std::size_t j = 0; j < gl.x.size(); ++j) {
        double tau = mid + half * gl.x[j];
        NearNode n;
        n.r = std::exp(tau);
        n.rho = std::exp(oms * tau);
        n.r_pow_ms = std::exp(-s * tau);
        n.w = oms * half * gl.w[j];
        lay.near.push_back(n);
      }
    }
    // asymptotic zone: dyadic panels in rho below rho_cut = (fc 2^-K)^{1-s};
    // there r = rho^{1/(1-s)} <= fc 2^-K, deep inside the Taylor branch
    double rho_cut = std::pow(fc * std::ldexp(1.0, -plan.resolve_levels), oms);
    for (int j = 0; j < plan.radial_levels; ++j) {
      double hi = rho_cut * std::ldexp(1.0, -j);
      double lo = 0.5 * hi;
      double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      for (std::size_t i = 0; i < gl.x.size(); ++i) {
        double rho = mid + half * gl.x[i];
        NearNode n;
        n.rho = rho;
        double lr = std::log(rho) / oms;
        n.r = lr < -740.0 ? 0.0 : std::exp(lr);  // underflow: exactly the diagonal
        n.r_pow_ms = 0.0;
        n.w = half * gl.w[i] / rho;
        lay.near.push_back(n);
      }
    }
    lay.rho_end = rho_cut * std::ldexp(1.0, -plan.radial_levels);
  } else {
    lay.scaled = false;
    for (int k = 0; k < plan.radial_levels; ++k) {
      double hi = std::log(fc) - k * ln2;
      double lo = hi - ln2;
      double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      for (std::size_t j = 0; j < gl.x.size(); ++j) {
        double tau = mid + half * gl.x[j];
        NearNode n;
        n.r = std::exp(tau);
        n.rho = std::exp(oms * tau);
        n.r_pow_ms = std::exp(-s * tau);
        n.w = half * gl.w[j];
        lay.near.push_back(n);
      }
    }
    lay.r_end = fc * std::ldexp(1.0, -plan.radial_levels);
  }
  return lay;
}

struct Directions {
  std::vector<Point> nodes;
  std::vector<double> weights;
  double total = 0;
};

Directions directions_for(int dim, int axis, int sphere_order) {
  Directions d;
  if (axis < 0) {
    SphereRule rule = sphere_rule(dim, sphere_order > 0 ? sphere_order : default_sphere_order(dim));
    d.nodes = std::move(rule.nodes);
    d.weights = std::move(rule.weights);
  } else {
    Point p{}, m{};
    p[axis] = 1.0;
    m[axis] = -1.0;
    d.nodes = {p, m};
    d.weights = {1.0, 1.0};
  }
  for (double w : d.weights) d.total += w;
  return d;
}

struct XNode {
  Point x;
  double w;
};

std::vector<XNode> build_xmesh(const TestFunction& u, const SamplingPlan& plan, int axis,
                               double* X_out) {
  const double R = u.support_radius;
  Mesh1D per_dim[kMaxDim];
  for (int dmi = 0; dmi < u.dim; ++dmi) {
    if (axis < 0 || dmi == axis) {
      per_dim[dmi] =
          winged_mesh(2.0 * R, plan.core_panels, plan.core_gl, plan.x_wing_levels, plan.wing_gl);
    } else {
      per_dim[dmi] =
          uniform_mesh(-u.support_box[dmi], u.support_box[dmi], plan.core_panels, plan.core_gl);
    }
  }
  *X_out = 2.0 * R * std::ldexp(1.0, plan.x_wing_levels);
  std::size_t total = 1;
  for (int dmi = 0; dmi < u.dim; ++dmi) total *= per_dim[dmi].nodes.size();
  std::vector<XNode> mesh;
  mesh.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    XNode xn;
    xn.x = Point{};
    xn.w = 1.0;
    std::size_t rem = flat;
    for (int dmi = 0; dmi < u.dim; ++dmi) {
      std::size_t i = rem % per_dim[dmi].nodes.size();
      rem /= per_dim[dmi].nodes.size();
      xn.x[dmi] = per_dim[dmi].nodes[i];
      xn.w *= per_dim[dmi].weights[i];
    }
    mesh.push_back(xn);
  }
  return mesh;
}

struct TermBuf {
  std::vector<double> w, q, x, y;

  void clear() {
    w.clear();
    q.clear();
    x.clear();
    y.clear();
  }

  void push(double wv, double qv, std::span<const double> xs, std::span<const double> ys) {
    w.push_back(wv);
    q.push_back(qv);
    x.insert(x.end(), xs.begin(), xs.end());
    y.insert(y.end(), ys.begin(), ys.end());
  }
};

struct XTails {
  double near_w = 0, near_c = 0;
  double far_w = 0, far_c = 0, far_rm = 0;
};

// All terms the point x contributes: near field over the radial layout and
// the direction set, far field over per-x geometric panels.
void emit_for_x(const TestFunction& u, double s, const SamplingPlan& plan,
                const RadialLayout& rad, const Directions& dirs, const XNode& xn, TermBuf& near,
                TermBuf& far, XTails& tails) {
  const int dim = u.dim;
  std::span<const double> x(xn.x.data(), dim);
  const double ux = u.eval(x);
  double grad[kMaxDim] = {0, 0, 0};
  u.gradient(x, std::span<double>(grad, dim));
  double gnorm = 0;
  for (int i = 0; i < dim; ++i) gnorm += grad[i] * grad[i];
  gnorm = std::sqrt(gnorm);
  const double fc = plan.far_cutoff;
  const double R = u.support_radius;
  const double xnorm = norm2(x);

  Point yp{};
  // near field: identically zero once x is more than fc outside the support box
  if (u.within_box(x, fc)) {
    for (std::size_t d = 0; d < dirs.nodes.size(); ++d) {
      std::span<const double> wdir(dirs.nodes[d].data(), dim);
      const double dw = dirs.weights[d];
      const double gw = std::abs(dot(std::span<const double>(grad, dim), wdir));
      for (const NearNode& nn : rad.near) {
        double q;
        for (int i = 0; i < dim; ++i) yp[i] = xn.x[i] - nn.r * wdir[i];
        std::span<const double> y(yp.data(), dim);
        if (nn.r >= kTaylorRadius) {
          double diff = ux - u.eval(y);
          if (diff == 0.0) continue;
          q = std::abs(diff) * nn.r_pow_ms;
        } else {
          if (gw == 0.0) continue;
          q = gw * nn.rho;
        }
        near.push(xn.w * dw * nn.w, q, x, y);
      }
    }
    if (gnorm > 0) {
      // quotient scale for the unresolved radial tail
      double rtz = rad.scaled
                       ? (std::log(rad.rho_end) / (1.0 - s) < -740.0
                              ? 0.0
                              : std::exp(std::log(rad.rho_end) / (1.0 - s)))
                       : rad.r_end;
      double c2 = std::isfinite(u.c2_bound) ? u.c2_bound : 0.0;
      tails.near_w = xn.w;
      tails.near_c = gnorm + 0.5 * c2 * rtz;
    }
  }

  // far field: geometric panels [fc 2^m, fc 2^{m+1}] out to (|x|+R) 2^extra
  const double reach = xnorm + R;
  int M = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(reach, fc) / fc)))) +
          plan.far_extra_levels;
  const double ln2 = std::log(2.0);
  const GaussRule& gl = gauss_legendre(plan.far_gl);
  for (int m = 0; m < M; ++m) {
    double r_lo = fc * std::ldexp(1.0, m);
    double r_hi = 2.0 * r_lo;
    if (ux == 0.0 && (r_hi < xnorm - R || r_lo > reach)) continue;  // u(x)=u(x-rw)=0
    double tau_lo = std::log(r_lo), tau_hi = tau_lo + ln2;
    double mid = 0.5 * (tau_lo + tau_hi), half = 0.5 * (tau_hi - tau_lo);
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
      double tau = mid + half * gl.x[j];
      double r = std::exp(tau);
      double rms = std::exp(-s * tau);
      double wj = half * gl.w[j];
      for (std::size_t d = 0; d < dirs.nodes.size(); ++d) {
        std::span<const double> wdir(dirs.nodes[d].data(), dim);
        for (int i = 0; i < dim; ++i) yp[i] = xn.x[i] - r * wdir[i];
        std::span<const double> y(yp.data(), dim);
        double diff = ux - u.eval(y);
        if (diff == 0.0) continue;
        far.push(xn.w * dirs.weights[d] * wj, std::abs(diff) * rms, x, y);
      }
    }
  }
  if (ux != 0.0) {
    tails.far_w = xn.w;
    tails.far_c = std::abs(ux);
    tails.far_rm = fc * std::ldexp(1.0, M);
  }
}

void init_profile_meta(ModularProfile& p, const TestFunction& u, double s,
                       const SamplingPlan& plan, int axis, double X, double dir_total) {
  p.dim = u.dim;
  p.s = s;
  p.one_minus_s = 1.0 - s;
  p.far_cutoff = plan.far_cutoff;
  p.near_scaled = plan.use_rho_substitution;
  p.aniso = axis >= 0;
  p.axis = axis;
  p.tail_tol_rel = plan.tail_tol_rel;
  p.sphere_total = dir_total;
  p.X = X;
  p.box_axis = axis >= 0 ? u.support_box[axis] : 0.0;
  // |u| samples over the support box for the Mu(lambda) integrals of the
  // outer-domain and Monte Carlo far tails
  BoxQuad bq = box_quadrature(u, 10, 4);
  for (std::size_t i = 0; i < bq.nodes.size(); ++i) {
    double v = std::abs(u.eval(std::span<const double>(bq.nodes[i].data(), u.dim)));
    if (v > 0) {
      p.mu_w.push_back(bq.weights[i]);
      p.mu_v.push_back(v);
    }
  }
}

double eval_mu(const ModularProfile& p, const GrowthBounds& gb, double inv_lambda) {
  double acc = 0;
  for (std::size_t i = 0; i < p.mu_v.size(); ++i) {
    double v = p.mu_v[i] * inv_lambda;
    acc += p.mu_w[i] * std::max(std::pow(v, gb.p_minus), std::pow(v, gb.p_plus));
  }
  return acc;
}

struct TailOut {
  double scaled = 0;
  double unscaled = 0;
};

TailOut eval_tails(const ModularProfile& p, const GrowthBounds& gb, double inv_lambda) {
  const double pm = gb.p_minus, pp = gb.p_plus, C2 = gb.c2, s = p.s;
  auto maxpow = [&](double c) {
    double v = c * inv_lambda;
    return v > 0 ? std::max(std::pow(v, pm), std::pow(v, pp)) : 0.0;
  };

  double near_sumc = 0;
  for (const auto& t : p.near_tail) near_sumc += t[0] * maxpow(t[1]);
  double near_tail;
  bool near_tail_scaled;
  if (p.near_scaled) {
    near_tail = C2 * p.sphere_total * std::pow(p.rho_end, pm) / pm * near_sumc;
    near_tail_scaled = true;
  } else {
    double e = (1.0 - s) * pm;
    near_tail = C2 * p.sphere_total * std::pow(p.r_end, e) / e * near_sumc;
    near_tail_scaled = false;
  }

  double far_tail = 0;
  for (const auto& t : p.far_tail)
    far_tail += t[0] * maxpow(t[1]) * std::pow(t[2], -s * pm);
  far_tail *= C2 * p.sphere_total / (s * pm);
  if (p.is_mc && p.mc_far_rmax > 0)
    far_tail += C2 * p.sphere_total * std::pow(p.mc_far_rmax, -s * pm) / (s * pm) *
                eval_mu(p, gb, inv_lambda);

  // outer-domain truncation; 1.05 headroom covers the Mu quadrature
  double x_tail = 0;
  if (!p.mu_v.empty()) {
    double mu = 1.05 * eval_mu(p, gb, inv_lambda);
    if (!p.aniso) {
      x_tail = C2 * std::pow(2.0, p.dim + s * pm) * surface_measure(p.dim) *
               std::pow(p.X, -s * pm) / (s * pm) * mu;
    } else {
      // swap x for z = x - h e_k over the support slab: |h| >= X - box_axis
      x_tail = C2 * 2.0 * std::pow(p.X - p.box_axis, -s * pm) / (s * pm) * mu;
    }
  }

  TailOut out;
  double unscaled_far_all = far_tail + x_tail;
  if (near_tail_scaled) {
    out.scaled = near_tail + (1.0 - s) * unscaled_far_all;
    out.unscaled = near_tail / (1.0 - s) + unscaled_far_all;
  } else {
    out.unscaled = near_tail + unscaled_far_all;
    out.scaled = (1.0 - s) * out.unscaled;
  }
  return out;
}

void extract_coefs(const YoungSpec& spec, const std::vector<double>& xs,
                   const std::vector<double>& ys, int dim, std::vector<double>* a,
                   std::vector<double>* pv) {
  std::size_t n = xs.size() / dim;
  switch (spec.kind()) {
    case YoungKind::power:
    case YoungKind::space_free:
      return;
    case YoungKind::power_log:
    case YoungKind::double_phase: {
      a->resize(n);
      const ScalarField& f = spec.coefficient();
      for (std::size_t i = 0; i < n; ++i)
        (*a)[i] = f(std::span<const double>(&xs[i * dim], dim),
                    std::span<const double>(&ys[i * dim], dim));
      return;
    }
    case YoungKind::variable_exponent: {
      a->resize(n);
      pv->resize(n);
      const ScalarField& f = spec.coefficient();
      const ScalarField& pf = spec.exponent_field();
      for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> x(&xs[i * dim], dim), y(&ys[i * dim], dim);
        (*a)[i] = f(x, y);
        (*pv)[i] = pf(x, y);
      }
      return;
    }
  }
}

void eval_term_block(const YoungSpec& spec, std::span<const double> w, std::span<const double> q,
                     double inv_lambda, std::span<const double> a, std::span<const double> pv,
                     std::span<double> out) {
  switch (spec.kind()) {
    case YoungKind::power:
      kernels::power_terms(w, q, inv_lambda, spec.exponent(), out);
      return;
    case YoungKind::double_phase:
      kernels::double_phase_terms(w, q, inv_lambda, spec.exponent_low(), spec.exponent(), a, out);
      return;
    case YoungKind::power_log:
      kernels::power_log_terms(w, q, inv_lambda, spec.exponent(), a, out);
      return;
    case YoungKind::variable_exponent:
      kernels::var_exponent_terms(w, q, inv_lambda, a, pv, out);
      return;
    case YoungKind::space_free:
      for (std::size_t i = 0; i < q.size(); ++i) {
        double t = q[i] * inv_lambda;
        out[i] = t > 0 ? w[i] * spec.A_scalar(t) : 0.0;
      }
      return;
  }
}

ModularResult assemble_result(const ModularProfile& p, const GrowthBounds& gb, double inv_lambda,
                              double near_sum, double far_sum, std::optional<double> var_near,
                              std::optional<double> var_far) {
  TailOut tails = eval_tails(p, gb, inv_lambda);
  ModularResult r;
  const double oms = p.one_minus_s;
  if (p.near_scaled) {
    r.near_field = near_sum / oms;
    r.far_field = far_sum;
    r.scaled = near_sum + oms * far_sum;
  } else {
    r.near_field = near_sum;
    r.far_field = far_sum;
    r.scaled = oms * (near_sum + far_sum);
  }
  r.value = r.near_field + r.far_field;
  r.tail_bound = tails.unscaled;
  r.scaled_tail_bound = tails.scaled;
  if (var_near && var_far) {
    double vn = *var_near, vf = *var_far;
    if (p.near_scaled) {
      r.mc_stderr = std::sqrt(vn / (oms * oms) + vf);
      r.mc_scaled_stderr = std::sqrt(vn + oms * oms * vf);
    } else {
      r.mc_stderr = std::sqrt(vn + vf);
      r.mc_scaled_stderr = oms * *r.mc_stderr;
    }
  }
  return r;
}

}  // namespace

void SamplingPlan::validate() const {
  if (!(far_cutoff > 0)) throw std::invalid_argument("SamplingPlan: far_cutoff must be positive");
  if (radial_levels < 8) throw std::invalid_argument("SamplingPlan: radial_levels must be >= 8");
  if (method == PlanMethod::monte_carlo && samples < 1000)
    throw std::invalid_argument("SamplingPlan: Monte Carlo needs at least 1e3 samples");
  if (core_panels < 1 || core_gl < 1 || radial_gl < 1 || far_gl < 1)
    throw std::invalid_argument("SamplingPlan: degenerate quadrature orders");
  if (resolve_levels < 1 || x_wing_levels < 0 || far_extra_levels < 1)
    throw std::invalid_argument("SamplingPlan: degenerate level counts");
}

SamplingPlan default_tensor_plan(int dim) {
  SamplingPlan p;
  p.method = PlanMethod::tensor;
  switch (dim) {
    case 1:
      p.core_panels = 14;
      p.core_gl = 8;
      p.x_wing_levels = 10;
      p.wing_gl = 4;
      p.resolve_levels = 30;
      p.radial_levels = 40;
      p.radial_gl = 8;
      p.far_extra_levels = 12;
      p.far_gl = 6;
      break;
    case 2:
      p.core_panels = 8;
      p.core_gl = 4;
      p.x_wing_levels = 10;
      p.wing_gl = 3;
      p.sphere_order = 32;
      p.resolve_levels = 24;
      p.radial_levels = 32;
      p.radial_gl = 4;
      p.far_extra_levels = 10;
      p.far_gl = 4;
      break;
    default:
      p.core_panels = 4;
      p.core_gl = 3;
      p.x_wing_levels = 6;
      p.wing_gl = 2;
      p.sphere_order = 8;
      p.resolve_levels = 20;
      p.radial_levels = 24;
      p.radial_gl = 3;
      p.far_extra_levels = 8;
      p.far_gl = 3;
      break;
  }
  return p;
}

SamplingPlan default_mc_plan(int dim, long long samples, std::uint64_t seed) {
  SamplingPlan p;
  p.method = PlanMethod::monte_carlo;
  p.samples = samples;
  p.seed = seed;
  p.sphere_order = default_sphere_order(dim);
  return p;
}

ModularProfile build_aniso_profile(const TestFunction& u, double s, int axis,
                                   const SamplingPlan& plan);

namespace {

// tensor driver: emits every x-node through `consume(xi, near, far, tails)`;
// per-x emission order is fixed, so any xi-indexed reduction is deterministic
template <class Consumer>
void tensor_drive(const TestFunction& u, double s, const SamplingPlan& plan, int axis,
                  ModularProfile& meta, Consumer&& consume) {
  RadialLayout rad = build_radial_layout(s, plan);
  Directions dirs = directions_for(u.dim, axis, plan.sphere_order);
  double X = 0;
  std::vector<XNode> mesh = build_xmesh(u, plan, axis, &X);
  init_profile_meta(meta, u, s, plan, axis, X, dirs.total);
  meta.rho_end = rad.rho_end;
  meta.r_end = rad.r_end;

  parallel_for(
      mesh.size(),
      [&](std::size_t b, std::size_t e) {
        TermBuf near, far;
        for (std::size_t xi = b; xi < e; ++xi) {
          near.clear();
          far.clear();
          XTails tails;
          emit_for_x(u, s, plan, rad, dirs, mesh[xi], near, far, tails);
          consume(xi, near, far, tails);
        }
      },
      plan.threads);
}

struct CollectConsumer {
  std::vector<TermBuf> near, far;
  std::vector<XTails> tails;

  explicit CollectConsumer(std::size_t n) : near(n), far(n), tails(n) {}

  void operator()(std::size_t xi, TermBuf& n, TermBuf& f, const XTails& t) {
    near[xi] = std::move(n);
    far[xi] = std::move(f);
    tails[xi] = t;
    n = TermBuf{};
    f = TermBuf{};
  }
};

void append_tails(ModularProfile& p, const XTails& t) {
  if (t.near_w != 0) p.near_tail.push_back({t.near_w, t.near_c});
  if (t.far_w != 0) p.far_tail.push_back({t.far_w, t.far_c, t.far_rm});
}

std::size_t xmesh_size(const TestFunction& u, const SamplingPlan& plan, int axis) {
  std::size_t per_winged =
      static_cast<std::size_t>(plan.core_panels) * plan.core_gl +
      2ull * plan.x_wing_levels * plan.wing_gl;
  std::size_t per_core = static_cast<std::size_t>(plan.core_panels) * plan.core_gl;
  std::size_t total = 1;
  for (int d = 0; d < u.dim; ++d)
    total *= (axis < 0 || d == axis) ? per_winged : per_core;
  return total;
}

std::size_t estimate_terms(const TestFunction& u, const SamplingPlan& plan, int axis) {
  std::size_t dirs = axis >= 0 ? 2
                               : sphere_rule(u.dim, plan.sphere_order > 0
                                                        ? plan.sphere_order
                                                        : default_sphere_order(u.dim))
                                     .size();
  std::size_t near_nodes =
      static_cast<std::size_t>(plan.resolve_levels + plan.radial_levels) * plan.radial_gl;
  std::size_t far_nodes = static_cast<std::size_t>(plan.far_extra_levels + 6) * plan.far_gl;
  return xmesh_size(u, plan, axis) * dirs * (near_nodes + far_nodes);
}

constexpr std::size_t kProfileLimit = 32u * 1000u * 1000u;

ModularProfile build_tensor_profile(const TestFunction& u, double s, const SamplingPlan& plan,
                                    int axis) {
  if (estimate_terms(u, plan, axis) > kProfileLimit)
    throw std::invalid_argument(
        "modular profile would be too large; use a Monte Carlo plan or a coarser tensor plan");
  ModularProfile p;
  std::size_t nx = xmesh_size(u, plan, axis);
  CollectConsumer cc(nx);
  tensor_drive(u, s, plan, axis, p, cc);
  for (std::size_t xi = 0; xi < nx; ++xi) {
    const TermBuf& n = cc.near[xi];
    p.near_w.insert(p.near_w.end(), n.w.begin(), n.w.end());
    p.near_q.insert(p.near_q.end(), n.q.begin(), n.q.end());
    p.near_x.insert(p.near_x.end(), n.x.begin(), n.x.end());
    p.near_y.insert(p.near_y.end(), n.y.begin(), n.y.end());
    const TermBuf& f = cc.far[xi];
    p.far_w.insert(p.far_w.end(), f.w.begin(), f.w.end());
    p.far_q.insert(p.far_q.end(), f.q.begin(), f.q.end());
    p.far_x.insert(p.far_x.end(), f.x.begin(), f.x.end());
    p.far_y.insert(p.far_y.end(), f.y.begin(), f.y.end());
    append_tails(p, cc.tails[xi]);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct McLayout {
  double Vc = 0;           // core box volume (4R)^n
  double X = 0;            // wing region reaches |x|_inf = X
  double Z = 0;            // wing radial normalization 1/(2R) - 1/X
  double rho_max = 0;      // fc^{1-s}
  double rmax = 0;         // far sampling reaches this radius
  long long n_core_near = 0, n_core_far = 0, n_wing_far = 0;
  long long block = 4096;
};

McLayout mc_layout(const TestFunction& u, double s, const SamplingPlan& plan) {
  McLayout L;
  const double R = u.support_radius;
  if (plan.far_cutoff > R)
    throw std::invalid_argument("monte carlo plan requires far_cutoff <= support radius");
  L.Vc = std::pow(4.0 * R, u.dim);
  L.X = 2.0 * R * std::ldexp(1.0, plan.x_wing_levels);
  L.Z = 1.0 / (2.0 * R) - 1.0 / L.X;
  L.rho_max = std::pow(plan.far_cutoff, 1.0 - s);
  L.rmax = 4.0 * (L.X * std::sqrt(static_cast<double>(u.dim)) + R);
  double f_wing = plan.x_wing_levels > 0 ? 0.15 : 0.0;
  double f_far = 0.25 + (0.15 - f_wing);
  long long bs = std::max<long long>(256, std::min<long long>(4096, plan.samples / 8));
  L.block = bs;
  auto blocks_of = [&](double frac) {
    long long want = static_cast<long long>(frac * plan.samples);
    return std::max<long long>(2, (want + bs / 2) / bs);
  };
  L.n_core_near = blocks_of(0.60) * bs;
  L.n_core_far = blocks_of(f_far) * bs;
  L.n_wing_far = f_wing > 0 ? blocks_of(f_wing) * bs : 0;
  return L;
}

void mc_direction(SplitMix64& rng, int dim, Point* w) {
  *w = Point{};
  switch (dim) {
    case 1:
      (*w)[0] = rng.next() & 1 ? 1.0 : -1.0;
      return;
    case 2: {
      double th = rng.uniform(0.0, 2.0 * M_PI);
      (*w)[0] = std::cos(th);
      (*w)[1] = std::sin(th);
      return;
    }
    default: {
      double c = rng.uniform(-1.0, 1.0);
      double phi = rng.uniform(0.0, 2.0 * M_PI);
      double sc = std::sqrt(std::max(0.0, 1.0 - c * c));
      (*w)[0] = sc * std::cos(phi);
      (*w)[1] = sc * std::sin(phi);
      (*w)[2] = c;
      return;
    }
  }
}

ModularProfile build_mc_profile(const TestFunction& u, double s, const SamplingPlan& plan) {
  McLayout L = mc_layout(u, s, plan);
  ModularProfile p;
  init_profile_meta(p, u, s, plan, -1, L.X, surface_measure(u.dim));
  p.is_mc = true;
  p.near_scaled = true;
  p.rho_end = 0;  // near sampling reaches rho = 0; no radial truncation
  p.mc_far_rmax = L.rmax;

  const int dim = u.dim;
  const double R = u.support_radius;
  const double fc = plan.far_cutoff;
  const double nwn = surface_measure(dim);
  const double log_far = std::log(L.rmax / fc);
  const double oms = 1.0 - s;

  struct StratumDef {
    int id;
    long long n;
    bool near;
  };
  std::vector<StratumDef> strata = {{0, L.n_core_near, true}, {1, L.n_core_far, false}};
  if (L.n_wing_far > 0) strata.push_back({2, L.n_wing_far, false});

  for (const StratumDef& st : strata) {
    long long nblocks = st.n / L.block;
    std::vector<TermBuf> bufs(nblocks);
    parallel_for(
        static_cast<std::size_t>(nblocks),
        [&](std::size_t bb, std::size_t be) {
          Point xp{}, wdir{}, yp{};
          double grad[kMaxDim];
          for (std::size_t blk = bb; blk < be; ++blk) {
            SplitMix64 rng(mix_seed(plan.seed, (st.id + 1) * 1000003ull + blk));
            TermBuf& buf = bufs[blk];
            for (long long i = 0; i < L.block; ++i) {
              // --- outer point
              double xw;
              if (st.id <= 1) {
                for (int d = 0; d < dim; ++d) xp[d] = rng.uniform(-2.0 * R, 2.0 * R);
                xw = L.Vc / static_cast<double>(st.n);
              } else {
                double xi = 1.0 / (1.0 / (2.0 * R) - rng.uniform() * L.Z);
                int face = static_cast<int>(rng.uniform() * dim);
                if (face >= dim) face = dim - 1;
                double sgn = rng.next() & 1 ? 1.0 : -1.0;
                for (int d = 0; d < dim; ++d) xp[d] = rng.uniform(-xi, xi);
                xp[face] = sgn * xi;
                double area = 2.0 * dim * std::pow(2.0 * xi, dim - 1);
                xw = L.Z * area * xi * xi / static_cast<double>(st.n);
              }
              std::span<const double> x(xp.data(), dim);
              double ux = u.eval(x);
              mc_direction(rng, dim, &wdir);
              std::span<const double> wd(wdir.data(), dim);

              double q, wterm;
              if (st.near) {
                double rho = rng.uniform() * L.rho_max;
                double lr = std::log(rho) / oms;
                double r = lr < -740.0 ? 0.0 : std::exp(lr);
                for (int d = 0; d < dim; ++d) yp[d] = xp[d] - r * wdir[d];
                std::span<const double> y(yp.data(), dim);
                if (r >= kTaylorRadius) {
                  q = std::abs(ux - u.eval(y)) * std::pow(r, -s);
                } else {
                  u.gradient(x, std::span<double>(grad, dim));
                  q = std::abs(dot(std::span<const double>(grad, dim), wd)) * rho;
                }
                if (q == 0.0) continue;
                wterm = xw * nwn * L.rho_max / rho;
                buf.push(wterm, q, x, y);
              } else {
                double r = fc * std::exp(rng.uniform() * log_far);
                for (int d = 0; d < dim; ++d) yp[d] = xp[d] - r * wdir[d];
                std::span<const double> y(yp.data(), dim);
                double diff = ux - u.eval(y);
                if (diff == 0.0) continue;
                q = std::abs(diff) * std::pow(r, -s);
                wterm = xw * nwn * log_far;
                buf.push(wterm, q, x, y);
              }
            }
          }
        },
        plan.threads);

    for (long long blk = 0; blk < nblocks; ++blk) {
      const TermBuf& b = bufs[blk];
      auto& tw = st.near ? p.near_w : p.far_w;
      std::size_t begin = tw.size();
      if (st.near) {
        p.near_w.insert(p.near_w.end(), b.w.begin(), b.w.end());
        p.near_q.insert(p.near_q.end(), b.q.begin(), b.q.end());
        p.near_x.insert(p.near_x.end(), b.x.begin(), b.x.end());
        p.near_y.insert(p.near_y.end(), b.y.begin(), b.y.end());
      } else {
        p.far_w.insert(p.far_w.end(), b.w.begin(), b.w.end());
        p.far_q.insert(p.far_q.end(), b.q.begin(), b.q.end());
        p.far_x.insert(p.far_x.end(), b.x.begin(), b.x.end());
        p.far_y.insert(p.far_y.end(), b.y.begin(), b.y.end());
      }
      p.mc_blocks.push_back({begin, st.near ? p.near_w.size() : p.far_w.size(),
                             st.id, st.near});
    }
  }
  return p;
}

double segment_sum(std::span<const double> buf, std::size_t b, std::size_t e) {
  return kernels::pairwise_sum(buf.subspan(b, e - b));
}

}  // namespace

ModularProfile build_modular_profile(const TestFunction& u, double s, const SamplingPlan& plan) {
  plan.validate();
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("modular: s must lie in (0,1)");
  if (plan.method == PlanMethod::monte_carlo) return build_mc_profile(u, s, plan);
  return build_tensor_profile(u, s, plan, -1);
}

ModularProfile build_aniso_profile(const TestFunction& u, double s, int axis,
                                   const SamplingPlan& plan) {
  plan.validate();
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("modular: s must lie in (0,1)");
  if (axis < 0 || axis >= u.dim) throw std::invalid_argument("modular_aniso: bad axis");
  if (plan.method == PlanMethod::monte_carlo)
    throw std::invalid_argument("modular_aniso: only tensor plans are supported");
  return build_tensor_profile(u, s, plan, axis);
}

SpecTerms extract_spec_terms(const YoungSpec& spec, const ModularProfile& profile) {
  SpecTerms t;
  t.kind = spec.kind();
  t.pexp = spec.exponent();
  t.qexp = spec.exponent_low();
  t.bounds = spec.bounds();
  t.spec = &spec;
  extract_coefs(spec, profile.near_x, profile.near_y, profile.dim, &t.a_near, &t.p_near);
  extract_coefs(spec, profile.far_x, profile.far_y, profile.dim, &t.a_far, &t.p_far);
  return t;
}

ModularResult eval_modular_profile(const ModularProfile& p, const SpecTerms& terms,
                                   double inv_lambda, int threads) {
  const YoungSpec& spec = *terms.spec;
  std::vector<double> near_buf(p.near_w.size()), far_buf(p.far_w.size());
  auto fill = [&](const std::vector<double>& w, const std::vector<double>& q,
                  const std::vector<double>& a, const std::vector<double>& pv,
                  std::vector<double>& out) {
    parallel_for(
        w.size(),
        [&](std::size_t b, std::size_t e) {
          std::span<const double> aw = a.empty() ? std::span<const double>()
                                                 : std::span<const double>(&a[b], e - b);
          std::span<const double> pw = pv.empty() ? std::span<const double>()
                                                  : std::span<const double>(&pv[b], e - b);
          eval_term_block(spec, std::span<const double>(&w[b], e - b),
                          std::span<const double>(&q[b], e - b), inv_lambda, aw, pw,
                          std::span<double>(&out[b], e - b));
        },
        threads);
  };
  if (!p.near_w.empty()) fill(p.near_w, p.near_q, terms.a_near, terms.p_near, near_buf);
  if (!p.far_w.empty()) fill(p.far_w, p.far_q, terms.a_far, terms.p_far, far_buf);

  double near_sum = kernels::pairwise_sum(near_buf);
  double far_sum = kernels::pairwise_sum(far_buf);

  std::optional<double> var_near, var_far;
  if (p.is_mc) {
    // block bootstrap within strata: Var(sum) = nb * sample var of block sums
    double vn = 0, vf = 0;
    for (int stratum = 0; stratum < 3; ++stratum) {
      std::vector<double> sums;
      bool near = false;
      for (const auto& blk : p.mc_blocks) {
        if (blk.stratum != stratum) continue;
        near = blk.near;
        sums.push_back(segment_sum(near ? near_buf : far_buf, blk.begin, blk.end));
      }
      if (sums.size() < 2) continue;
      double mean = 0;
      for (double v : sums) mean += v;
      mean /= sums.size();
      double ss = 0;
      for (double v : sums) ss += (v - mean) * (v - mean);
      double var_total = sums.size() * ss / (sums.size() - 1.0);
      (near ? vn : vf) += var_total;
    }
    var_near = vn;
    var_far = vf;
  }
  return assemble_result(p, terms.bounds, inv_lambda, near_sum, far_sum, var_near, var_far);
}

namespace {

ModularResult stream_tensor(const YoungSpec& spec, const TestFunction& u, double s,
                            const SamplingPlan& plan, int axis) {
  ModularProfile meta;
  std::size_t nx = xmesh_size(u, plan, axis);
  std::vector<double> near_x(nx, 0.0), far_x(nx, 0.0);
  std::vector<XTails> tails(nx);
  struct StreamConsumer {
    const YoungSpec* spec;
    std::vector<double>* near_x;
    std::vector<double>* far_x;
    std::vector<XTails>* tails;
    int dim;

    void operator()(std::size_t xi, TermBuf& n, TermBuf& f, const XTails& t) {
      thread_local std::vector<double> a, pv, out;
      auto eval_buf = [&](const TermBuf& b) {
        a.clear();
        pv.clear();
        extract_coefs(*spec, b.x, b.y, dim, &a, &pv);
        out.resize(b.w.size());
        eval_term_block(*spec, b.w, b.q, 1.0, a, pv, out);
        return kernels::pairwise_sum(out);
      };
      (*near_x)[xi] = eval_buf(n);
      (*far_x)[xi] = eval_buf(f);
      (*tails)[xi] = t;
    }
  } consumer{&spec, &near_x, &far_x, &tails, u.dim};
  tensor_drive(u, s, plan, axis, meta, consumer);
  for (const XTails& t : tails) append_tails(meta, t);
  double near_sum = kernels::pairwise_sum(near_x);
  double far_sum = kernels::pairwise_sum(far_x);
  return assemble_result(meta, spec.bounds(), 1.0, near_sum, far_sum, std::nullopt,
                         std::nullopt);
}

void gate_tails(const ModularResult& r, const SamplingPlan& plan) {
  auto check = [&](double tail, double value, const char* which) {
    if (tail > plan.tail_tol_rel * std::abs(value) + 1e-300) {
      std::ostringstream os;
      os << "modular: certified " << which << " truncation bound " << tail
         << " exceeds tolerance " << plan.tail_tol_rel << " * " << value
         << "; increase radial/wing depth or loosen tail_tol_rel";
      throw TailBoundError(os.str(), tail);
    }
  };
  check(r.tail_bound, r.value, "unscaled");
  check(r.scaled_tail_bound, r.scaled, "scaled");
}

ModularResult modular_impl(const YoungSpec& spec, const TestFunction& u, double s, int axis,
                           const SamplingPlan& plan) {
  plan.validate();
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("modular: s must lie in (0,1)");
  ModularResult r;
  if (plan.method == PlanMethod::monte_carlo) {
    if (axis >= 0) throw std::invalid_argument("modular_aniso: only tensor plans are supported");
    ModularProfile p = build_mc_profile(u, s, plan);
    SpecTerms t = extract_spec_terms(spec, p);
    r = eval_modular_profile(p, t, 1.0, plan.threads);
  } else if (estimate_terms(u, plan, axis) <= kProfileLimit) {
    ModularProfile p = build_tensor_profile(u, s, plan, axis);
    SpecTerms t = extract_spec_terms(spec, p);
    r = eval_modular_profile(p, t, 1.0, plan.threads);
  } else {
    r = stream_tensor(spec, u, s, plan, axis);
  }
  gate_tails(r, plan);
  return r;
}

}  // namespace

ModularResult modular_Js(const YoungSpec& spec, const TestFunction& u, double s,
                         const SamplingPlan& plan) {
  return modular_impl(spec, u, s, -1, plan);
}

double scaled_modular(const YoungSpec& spec, const TestFunction& u, double s,
                      const SamplingPlan& plan) {
  return modular_impl(spec, u, s, -1, plan).scaled;
}

ModularResult modular_aniso(const YoungSpec& spec, const TestFunction& u, double s, int axis,
                            const SamplingPlan& plan) {
  if (axis < 0 || axis >= u.dim) throw std::invalid_argument("modular_aniso: bad axis");
  return modular_impl(spec, u, s, axis, plan);
}

double far_field_pointwise_bound(const YoungSpec& spec, const TestFunction& u, double s) {
  const GrowthBounds& gb = spec.bounds();
  double m = std::max(std::pow(u.sup_u, gb.p_minus), std::pow(u.sup_u, gb.p_plus));
  return gb.c2 * std::pow(2.0, gb.p_plus) * m * surface_measure(u.dim) / s;
}

}  // namespace fracmod
