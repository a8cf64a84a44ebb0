#pragma once

#include <cstddef>
#include <span>

// Element-wise accumulation kernels for the modular inner loops, with a scalar
// reference implementation and an AVX2 variant selected at runtime. The SIMD
// paths cover the integer-exponent power laws (the hot cases); everything
// transcendental stays scalar. Both paths perform the same IEEE operations in
// the same per-element order, and this translation unit is built with
// contraction disabled, so scalar and SIMD buffers are bit-identical.
// Reductions always go through pairwise_sum so the final sum does not depend
// on which variant filled the buffer.

namespace fracmod::kernels {

// Fixed-tree pairwise summation; deterministic for a given element order.
double pairwise_sum(std::span<const double> v);

// out[i] = w[i] * (q[i]*c)^p.  p == 2 or 3 dispatches to the SIMD variant.
void power_terms(std::span<const double> w, std::span<const double> q, double c, double p,
                 std::span<double> out);

// out[i] = w[i] * ((q[i]*c)^qe + a[i]*(q[i]*c)^pe); SIMD when qe,pe integer <= 4.
void double_phase_terms(std::span<const double> w, std::span<const double> q, double c,
                        double qe, double pe, std::span<const double> a,
                        std::span<double> out);

// out[i] = w[i] * a[i] * t^p * (log+(t) + 1), t = q[i]*c.  Scalar only.
void power_log_terms(std::span<const double> w, std::span<const double> q, double c, double p,
                     std::span<const double> a, std::span<double> out);

// out[i] = w[i] * a[i] * t^{pvar[i]}, t = q[i]*c.  Scalar only.
void var_exponent_terms(std::span<const double> w, std::span<const double> q, double c,
                        std::span<const double> a, std::span<const double> pvar,
                        std::span<double> out);

bool simd_active();
const char* simd_name();

// Test hooks: force the scalar reference path (returns previous setting).
bool force_scalar(bool on);

}  // namespace fracmod::kernels
