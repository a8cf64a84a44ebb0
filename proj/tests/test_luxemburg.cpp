#include <doctest.h>

#include <cmath>

#include "fracmod/luxemburg.hpp"

using namespace fracmod;

namespace {

TestFunction scaled_copy(const TestFunction& u, double c) {
  TestFunction v = u;
  v.amp *= c;
  v.sup_u *= c;
  v.sup_grad *= c;
  v.c2_bound *= c;
  return v;
}

SamplingPlan quick_plan_1d() {
  SamplingPlan p = default_tensor_plan(1);
  p.core_panels = 10;
  p.core_gl = 6;
  p.radial_gl = 6;
  return p;
}

}  // namespace

TEST_CASE("bisection on explicit monotone modulars") {
  // modular(u/lambda) = 4 / lambda^2: the root is exactly 2
  NormResult r = luxemburg_bisect([](double l) { return 4.0 / (l * l); });
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(!r.zero);
  // infimum bracket: the modular crosses 1 inside [lo, hi]
  CHECK(r.lo <= 2.0);
  CHECK(r.hi >= 2.0);
  CHECK(r.hi - r.lo <= 1e-8 * r.hi * (1 + 1e-12));

  // identically-zero modular: the norm is zero
  NormResult z = luxemburg_bisect([](double) { return 0.0; });
  CHECK(z.zero);
  CHECK(z.value == 0.0);

  // tiny norm: bracket expands downward a long way but still resolves
  NormResult t = luxemburg_bisect([](double l) { return 1e-12 / l; });
  CHECK(t.value == doctest::Approx(1e-12).epsilon(1e-6));
}

TEST_CASE("non-monotone evaluators are rejected") {
  auto rigged = [](double l) { return l < 1.0 ? 0.5 : l; };  // increases with lambda
  CHECK_THROWS_AS(luxemburg_bisect(rigged), ContractViolation);
}

TEST_CASE("orlicz norm: Gbar = t^2 and L2 mass 4 gives norm 2") {
  const TestFunction& pb = bank_member(1, "polybump");
  YoungSpec p2 = YoungSpec::power(2.0);
  BoxQuad quad = box_quadrature(pb, 24, 6);
  double l2 = 0;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    double v = pb.eval(std::span<const double>(quad.nodes[i].data(), 1));
    l2 += quad.weights[i] * v * v;
  }
  TestFunction u4 = scaled_copy(pb, 2.0 / std::sqrt(l2));  // now the modular is exactly 4
  NormResult r = orlicz_norm_gbar(p2, u4, quad);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-7));

  const TestFunction& z = bank_member(1, "zero");
  CHECK(orlicz_norm_gbar(p2, z, quad).value == 0.0);
}

TEST_CASE("pure powers: seminorms reduce to explicit roots") {
  const TestFunction& u = bank_member(1, "cosbump");
  SamplingPlan plan = quick_plan_1d();
  double s = 0.8;
  ModularProfile prof = build_modular_profile(u, s, plan);
  for (double p : {2.0, 3.0}) {
    YoungSpec spec = YoungSpec::power(p);
    SpecTerms terms = extract_spec_terms(spec, prof);
    double J = eval_modular_profile(prof, terms, 1.0).value;
    double scaled = eval_modular_profile(prof, terms, 1.0).scaled;
    NormResult plain = seminorm(prof, terms);
    CHECK(plain.value == doctest::Approx(std::pow(J, 1.0 / p)).epsilon(1e-7));
    NormResult dbl = scaled_seminorm(prof, terms);
    CHECK(dbl.value == doctest::Approx(std::pow(scaled, 1.0 / p)).epsilon(1e-7));
  }
}

TEST_CASE("luxemburg homogeneity beyond powers") {
  const TestFunction& u = bank_member(1, "polybump");
  YoungSpec dp = YoungSpec::double_phase(2.0, 3.0, ScalarField::smooth_bump(1.0, 0.5, 1.0));
  SamplingPlan plan = quick_plan_1d();
  double s = 0.7;
  ModularProfile prof = build_modular_profile(u, s, plan);
  ModularProfile prof3 = build_modular_profile(scaled_copy(u, 3.0), s, plan);
  SpecTerms terms = extract_spec_terms(dp, prof);
  SpecTerms terms3 = extract_spec_terms(dp, prof3);
  double n1 = scaled_seminorm(prof, terms).value;
  double n3 = scaled_seminorm(prof3, terms3).value;
  CHECK(n3 == doctest::Approx(3.0 * n1).epsilon(1e-7));
}

TEST_CASE("unit ball correspondence: norm <= 1 iff modular <= 1") {
  const TestFunction& u = bank_member(1, "cosbump");
  YoungSpec dp = YoungSpec::double_phase(2.0, 3.0, ScalarField::smooth_bump(1.0, 0.5, 1.0));
  SamplingPlan plan = quick_plan_1d();
  ModularProfile prof = build_modular_profile(u, 0.7, plan);
  SpecTerms terms = extract_spec_terms(dp, prof);
  double norm = scaled_seminorm(prof, terms).value;
  REQUIRE(norm > 0);
  for (double c : {0.5, 0.9, 0.99, 1.01, 1.5}) {
    // v = c u / norm has seminorm c (homogeneity); its modular sits on the
    // same side of 1
    double modular_v = eval_modular_profile(prof, terms, c / norm).scaled;
    if (c < 1.0) CHECK(modular_v <= 1.0 + 1e-9);
    if (c > 1.0) CHECK(modular_v >= 1.0 - 1e-9);
  }
}

TEST_CASE("modular-norm equivalence implications") {
  // pure-power equality case: modular exactly 4, p = 2, C = 4
  auto power_modular = [](double l) { return 4.0 / (l * l); };
  EquivalenceReport eq = check_modular_norm_equivalence(power_modular, 2.0, 2.0, 4.0);
  CHECK(eq.modular_leq_C);
  CHECK(eq.norm == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(eq.c_root == doctest::Approx(2.0));
  CHECK(eq.pass());

  // random double-phase local modulars over bump fields, 20 cases
  YoungSpec dp = YoungSpec::double_phase(2.0, 3.0, ScalarField::smooth_bump(1.0, 0.5, 1.0));
  const TestFunction& pb = bank_member(1, "polybump");
  BoxQuad quad = box_quadrature(pb, 12, 4);
  SplitMix64 rng(77);
  for (int it = 0; it < 20; ++it) {
    double c = std::exp(rng.uniform(std::log(0.2), std::log(5.0)));
    TestFunction v = scaled_copy(pb, c);
    auto modular = [&](double l) {
      double acc = 0;
      for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
        std::span<const double> x(quad.nodes[i].data(), 1);
        double uv = std::abs(v.eval(x));
        if (uv > 0) acc += quad.weights[i] * dp.G_bar(x, uv / l);
      }
      return acc;
    };
    double C = 1.0 + rng.uniform() * 5.0;
    EquivalenceReport rep =
        check_modular_norm_equivalence(modular, dp.bounds().p_minus, dp.bounds().p_plus, C);
    INFO("case " << it << " C=" << C << " modular=" << rep.modular << " norm=" << rep.norm);
    CHECK(rep.pass());
  }
  CHECK_THROWS(check_modular_norm_equivalence(power_modular, 2.0, 2.0, 0.5));
}

TEST_CASE("norm inequality study: ratio settles at or below 1 (power case)") {
  const TestFunction& u = bank_member(1, "cosbump");
  YoungSpec p2 = YoungSpec::power(2.0);
  SamplingPlan plan = default_tensor_plan(1);
  auto rows = norm_inequality_study(p2, u, {0.9, 0.99, 0.999}, plan);
  REQUIRE(rows.size() == 3);
  CHECK(rows.back().ratio <= 1.05);
  // the ratio approaches 1 from the scaled modular's convergence
  CHECK(std::abs(rows.back().ratio - 1.0) <= 0.02);
  for (const auto& r : rows) CHECK(r.grad_norm == doctest::Approx(rows[0].grad_norm));
}

TEST_CASE("zero function norms") {
  const TestFunction& z = bank_member(1, "zero");
  SamplingPlan plan = quick_plan_1d();
  ModularProfile prof = build_modular_profile(z, 0.9, plan);
  YoungSpec p2 = YoungSpec::power(2.0);
  SpecTerms terms = extract_spec_terms(p2, prof);
  CHECK(scaled_seminorm(prof, terms).value == 0.0);
  CHECK(scaled_seminorm(prof, terms).zero);
}

TEST_CASE("bisection bails out when the iteration budget is too small") {
  NormQuery q;
  q.rel_tol = 1e-12;
  q.max_iter = 3;
  CHECK_THROWS_AS(luxemburg_bisect([](double l) { return 4.0 / (l * l); }, q),
                  ContractViolation);
}

TEST_CASE("norm ratios trend toward 1 for the variable-exponent preset") {
  const TestFunction& u = bank_member(1, "cosbump");
  YoungSpec ve = YoungSpec::variable_exponent(ScalarField::smooth_bump(2.0, 0.5, 1.0),
                                              ScalarField::constant(1.0));
  SamplingPlan plan = default_tensor_plan(1);
  auto rows = norm_inequality_study(ve, u, {0.9, 0.99, 0.999}, plan);
  REQUIRE(rows.size() == 3);
  CHECK(rows.back().ratio <= 1.02);
  CHECK(std::abs(rows.back().ratio - 1.0) <= std::abs(rows.front().ratio - 1.0));
}

TEST_CASE("equivalence report on the zero field is vacuous both ways") {
  EquivalenceReport rep =
      check_modular_norm_equivalence([](double) { return 0.0; }, 2.0, 3.0, 2.0);
  CHECK(rep.modular == 0.0);
  CHECK(rep.norm == 0.0);
  CHECK(rep.pass());
}

TEST_CASE("norm inequality study on the zero function is all zeros") {
  const TestFunction& z = bank_member(1, "zero");
  YoungSpec p2 = YoungSpec::power(2.0);
  SamplingPlan plan = default_tensor_plan(1);
  auto rows = norm_inequality_study(p2, z, {0.9, 0.999}, plan);
  for (const auto& r : rows) {
    CHECK(r.seminorm_scaled == 0.0);
    CHECK(r.grad_norm == 0.0);
    CHECK(r.ratio == 0.0);
  }
}
