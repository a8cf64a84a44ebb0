#include "fracmod/kernels.hpp"

#include <atomic>
#include <cmath>

namespace fracmod::kernels {

namespace {

std::atomic<bool> g_force_scalar{false};

bool have_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

bool use_simd() { return have_avx2() && !g_force_scalar.load(std::memory_order_relaxed); }

inline double ipow2(double t) { return t * t; }
inline double ipow3(double t) { return (t * t) * t; }
inline double ipow4(double t) { return (t * t) * (t * t); }

inline double ipow(double t, int e) {
  switch (e) {
    case 2: return ipow2(t);
    case 3: return ipow3(t);
    case 4: return ipow4(t);
    default: return std::pow(t, e);
  }
}

bool small_int_exp(double p, int* out) {
  for (int e = 2; e <= 4; ++e) {
    if (p == static_cast<double>(e)) {
      *out = e;
      return true;
    }
  }
  return false;
}

void power_terms_scalar(std::span<const double> w, std::span<const double> q, double c,
                        double p, std::span<double> out) {
  const std::size_t n = q.size();
  int e;
  if (small_int_exp(p, &e)) {
    for (std::size_t i = 0; i < n; ++i) out[i] = w[i] * ipow(q[i] * c, e);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double t = q[i] * c;
      out[i] = t > 0 ? w[i] * std::pow(t, p) : 0.0;
    }
  }
}

void double_phase_terms_scalar(std::span<const double> w, std::span<const double> q, double c,
                               double qe, double pe, std::span<const double> a,
                               std::span<double> out) {
  const std::size_t n = q.size();
  int eq, ep;
  if (small_int_exp(qe, &eq) && small_int_exp(pe, &ep)) {
    for (std::size_t i = 0; i < n; ++i) {
      double t = q[i] * c;
      out[i] = w[i] * (ipow(t, eq) + a[i] * ipow(t, ep));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double t = q[i] * c;
      out[i] = t > 0 ? w[i] * (std::pow(t, qe) + a[i] * std::pow(t, pe)) : 0.0;
    }
  }
}

}  // namespace

#if defined(__x86_64__) || defined(__i386__)
// defined in kernels_avx2.cpp
void power2_terms_avx2(const double* w, const double* q, double c, double* out, std::size_t n);
void power3_terms_avx2(const double* w, const double* q, double c, double* out, std::size_t n);
void double_phase_terms_avx2(const double* w, const double* q, double c, int eq, int ep,
                             const double* a, double* out, std::size_t n);
#endif

double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= 16) {
    double s = 0;
    for (double x : v) s += x;
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void power_terms(std::span<const double> w, std::span<const double> q, double c, double p,
                 std::span<double> out) {
#if defined(__x86_64__) || defined(__i386__)
  if (use_simd()) {
    if (p == 2.0) {
      power2_terms_avx2(w.data(), q.data(), c, out.data(), q.size());
      return;
    }
    if (p == 3.0) {
      power3_terms_avx2(w.data(), q.data(), c, out.data(), q.size());
      return;
    }
  }
#endif
  power_terms_scalar(w, q, c, p, out);
}

void double_phase_terms(std::span<const double> w, std::span<const double> q, double c,
                        double qe, double pe, std::span<const double> a,
                        std::span<double> out) {
#if defined(__x86_64__) || defined(__i386__)
  int eq, ep;
  if (use_simd() && small_int_exp(qe, &eq) && small_int_exp(pe, &ep)) {
    double_phase_terms_avx2(w.data(), q.data(), c, eq, ep, a.data(), out.data(), q.size());
    return;
  }
#endif
  double_phase_terms_scalar(w, q, c, qe, pe, a, out);
}

void power_log_terms(std::span<const double> w, std::span<const double> q, double c, double p,
                     std::span<const double> a, std::span<double> out) {
  const std::size_t n = q.size();
  for (std::size_t i = 0; i < n; ++i) {
    double t = q[i] * c;
    if (t <= 0) {
      out[i] = 0.0;
      continue;
    }
    double logp = t > 1.0 ? std::log(t) : 0.0;
    out[i] = w[i] * a[i] * std::pow(t, p) * (logp + 1.0);
  }
}

void var_exponent_terms(std::span<const double> w, std::span<const double> q, double c,
                        std::span<const double> a, std::span<const double> pvar,
                        std::span<double> out) {
  const std::size_t n = q.size();
  for (std::size_t i = 0; i < n; ++i) {
    double t = q[i] * c;
    out[i] = t > 0 ? w[i] * a[i] * std::pow(t, pvar[i]) : 0.0;
  }
}

bool simd_active() { return use_simd(); }

const char* simd_name() { return use_simd() ? "avx2" : "scalar"; }

bool force_scalar(bool on) { return g_force_scalar.exchange(on); }

}  // namespace fracmod::kernels
