#pragma once

#include <functional>
#include <vector>

#include "fracmod/modular.hpp"

namespace fracmod {

struct NormQuery {
  double rel_tol = 1e-8;
  int max_iter = 200;
};

struct NormResult {
  double value = 0;
  double lo = 0, hi = 0;  // final bracket
  int iterations = 0;
  double modular_at_value = 0;
  double propagated_error = 0;  // first-order: tail * lambda / p-
  bool zero = false;
};

// inf{lambda > 0 : modular(u/lambda) <= 1} by monotone bisection with an
// expanding bracket from lambda = 1. The evaluator must be nonincreasing in
// lambda; violations raise ContractViolation. Identically-zero modulars give 0.
NormResult luxemburg_bisect(const std::function<double(double)>& modular_of_scaled,
                            const NormQuery& query = {});

// [[u]]_{s,G}: Luxemburg bisection against lambda -> (1-s) J_{s,G}(u/lambda),
// on a prebuilt profile so each step is a single accumulation pass.
NormResult scaled_seminorm(const ModularProfile& profile, const SpecTerms& terms,
                           const NormQuery& query = {});
NormResult scaled_seminorm(const YoungSpec& spec, const TestFunction& u, double s,
                           const SamplingPlan& plan, const NormQuery& query = {});

// [u]_{s,G} (no (1-s) factor).
NormResult seminorm(const ModularProfile& profile, const SpecTerms& terms,
                    const NormQuery& query = {});

// Lebesgue-Orlicz norm ||u||_Gbar over the support box.
NormResult orlicz_norm_gbar(const YoungSpec& spec, const TestFunction& u, const BoxQuad& quad,
                            const NormQuery& query = {});

// ||grad u||_{H0}.
NormResult grad_norm_h0(const H0Evaluator& ev, const TestFunction& u, const BoxQuad& quad,
                        const NormQuery& query = {});

// Both directions of the modular <-> norm comparison at level C >= 1:
// modular <= C implies norm <= C^{1/p-}, and norm <= C implies modular <= C^{p+}.
struct EquivalenceReport {
  double modular = 0;
  double norm = 0;
  double c_root = 0;   // C^{1/p-}
  double c_power = 0;  // C^{p+}
  bool modular_leq_C = false;
  bool norm_leq_C = false;
  bool dir1_ok = true;  // vacuously true when the hypothesis fails
  bool dir2_ok = true;
  bool pass() const { return dir1_ok && dir2_ok; }
};

EquivalenceReport check_modular_norm_equivalence(
    const std::function<double(double)>& modular_of_scaled, double p_minus, double p_plus,
    double C, double tol = 1e-9, const NormQuery& query = {});

struct NormStudyRow {
  double s = 0;
  double seminorm_scaled = 0;  // [[u]]_{s,G}
  double grad_norm = 0;        // ||grad u||_{H0}
  double ratio = 0;
};

std::vector<NormStudyRow> norm_inequality_study(const YoungSpec& spec, const TestFunction& u,
                                                const std::vector<double>& s_grid,
                                                const SamplingPlan& plan,
                                                const NormQuery& query = {});

}  // namespace fracmod
