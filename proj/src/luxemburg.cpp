#include "fracmod/luxemburg.hpp"

#include <cmath>

namespace fracmod {

NormResult luxemburg_bisect(const std::function<double(double)>& modular_of_scaled,
                            const NormQuery& query) {
  NormResult out;
  double lo = 1.0, hi = 1.0;
  double phi1 = modular_of_scaled(1.0);
  if (!(phi1 >= 0) || !std::isfinite(phi1))
    throw ContractViolation("luxemburg: modular evaluator returned a non-finite value");

  if (phi1 > 1.0) {
    // expand upward until the modular drops below 1
    double prev = phi1;
    for (int k = 0; k < 200; ++k) {
      hi *= 2.0;
      double v = modular_of_scaled(hi);
      if (v > prev * (1.0 + 1e-9))
        throw ContractViolation("luxemburg: modular increased with lambda (non-monotone)");
      prev = v;
      if (v <= 1.0) break;
      lo = hi;
    }
    if (prev > 1.0) throw ContractViolation("luxemburg: failed to bracket (modular stays > 1)");
  } else {
    // shrink downward until the modular exceeds 1; an identically-small
    // modular means the norm is zero
    double prev = phi1;
    bool bracketed = false;
    for (int k = 0; k < 400; ++k) {
      lo *= 0.5;
      double v = modular_of_scaled(lo);
      if (v < prev * (1.0 - 1e-9) - 1e-300)
        throw ContractViolation("luxemburg: modular decreased as lambda shrank (non-monotone)");
      prev = v;
      if (v >= 1.0) {
        bracketed = true;
        break;
      }
      hi = lo;
      if (lo < 1e-100) break;
    }
    if (!bracketed) {
      out.zero = true;
      out.value = 0.0;
      out.lo = out.hi = 0.0;
      return out;
    }
  }

  int it = 0;
  for (; it < query.max_iter && (hi - lo) > query.rel_tol * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (modular_of_scaled(mid) >= 1.0 ? lo : hi) = mid;
  }
  if ((hi - lo) > query.rel_tol * hi)
    throw ContractViolation("luxemburg: max iterations exhausted before the bracket closed");
  out.value = 0.5 * (lo + hi);
  out.lo = lo;
  out.hi = hi;
  out.iterations = it;
  out.modular_at_value = modular_of_scaled(out.value);
  return out;
}

NormResult scaled_seminorm(const ModularProfile& profile, const SpecTerms& terms,
                           const NormQuery& query) {
  NormResult r = luxemburg_bisect(
      [&](double lambda) {
        return eval_modular_profile(profile, terms, 1.0 / lambda).scaled;
      },
      query);
  if (!r.zero) {
    double tail = eval_modular_profile(profile, terms, 1.0 / r.value).scaled_tail_bound;
    r.propagated_error = tail * r.value / terms.bounds.p_minus;
  }
  return r;
}

NormResult scaled_seminorm(const YoungSpec& spec, const TestFunction& u, double s,
                           const SamplingPlan& plan, const NormQuery& query) {
  ModularProfile profile = build_modular_profile(u, s, plan);
  SpecTerms terms = extract_spec_terms(spec, profile);
  return scaled_seminorm(profile, terms, query);
}

NormResult seminorm(const ModularProfile& profile, const SpecTerms& terms,
                    const NormQuery& query) {
  return luxemburg_bisect(
      [&](double lambda) {
        return eval_modular_profile(profile, terms, 1.0 / lambda).value;
      },
      query);
}

NormResult orlicz_norm_gbar(const YoungSpec& spec, const TestFunction& u, const BoxQuad& quad,
                            const NormQuery& query) {
  // field samples are lambda-independent; precompute once
  std::vector<Point> xs;
  std::vector<double> w, v;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    double uv = std::abs(u.eval(std::span<const double>(quad.nodes[i].data(), quad.dim)));
    if (uv > 0) {
      xs.push_back(quad.nodes[i]);
      w.push_back(quad.weights[i]);
      v.push_back(uv);
    }
  }
  return luxemburg_bisect(
      [&](double lambda) {
        double acc = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
          acc += w[i] * spec.G_bar(std::span<const double>(xs[i].data(), quad.dim),
                                   v[i] / lambda);
        return acc;
      },
      query);
}

NormResult grad_norm_h0(const H0Evaluator& ev, const TestFunction& u, const BoxQuad& quad,
                        const NormQuery& query) {
  std::vector<Point> xs;
  std::vector<double> w, v;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    double gv = u.grad_norm(std::span<const double>(quad.nodes[i].data(), quad.dim));
    if (gv > 0) {
      xs.push_back(quad.nodes[i]);
      w.push_back(quad.weights[i]);
      v.push_back(gv);
    }
  }
  return luxemburg_bisect(
      [&](double lambda) {
        double acc = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
          acc += w[i] * h0_eval(ev, std::span<const double>(xs[i].data(), ev.dim),
                                v[i] / lambda);
        return acc;
      },
      query);
}

EquivalenceReport check_modular_norm_equivalence(
    const std::function<double(double)>& modular_of_scaled, double p_minus, double p_plus,
    double C, double tol, const NormQuery& query) {
  if (!(C >= 1.0)) throw std::invalid_argument("check_modular_norm_equivalence: C must be >= 1");
  EquivalenceReport rep;
  rep.modular = modular_of_scaled(1.0);
  rep.norm = luxemburg_bisect(modular_of_scaled, query).value;
  rep.c_root = std::pow(C, 1.0 / p_minus);
  rep.c_power = std::pow(C, p_plus);
  rep.modular_leq_C = rep.modular <= C;
  rep.norm_leq_C = rep.norm <= C;
  if (rep.modular_leq_C) rep.dir1_ok = rep.norm <= rep.c_root * (1.0 + tol) + tol;
  if (rep.norm_leq_C) rep.dir2_ok = rep.modular <= rep.c_power * (1.0 + tol) + tol;
  return rep;
}

std::vector<NormStudyRow> norm_inequality_study(const YoungSpec& spec, const TestFunction& u,
                                                const std::vector<double>& s_grid,
                                                const SamplingPlan& plan,
                                                const NormQuery& query) {
  H0Evaluator ev = make_h0_evaluator(spec, u.dim);
  BoxQuad quad = box_quadrature(u, 12, 6);
  double gnorm = grad_norm_h0(ev, u, quad, query).value;
  std::vector<NormStudyRow> rows;
  for (double s : s_grid) {
    NormStudyRow row;
    row.s = s;
    row.seminorm_scaled = scaled_seminorm(spec, u, s, plan, query).value;
    row.grad_norm = gnorm;
    row.ratio = gnorm > 0 ? row.seminorm_scaled / gnorm : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fracmod
