// AVX2 variants of the power-law term kernels. Only mul/add intrinsics are
// used (no FMA), matching the scalar reference operation-for-operation so the
// two paths produce bit-identical buffers.

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cstddef>

namespace fracmod::kernels {

namespace {

__attribute__((target("avx2"), always_inline)) inline __m256d vipow(__m256d t, int e) {
  __m256d t2 = _mm256_mul_pd(t, t);
  switch (e) {
    case 2: return t2;
    case 3: return _mm256_mul_pd(t2, t);
    default: return _mm256_mul_pd(t2, t2);  // e == 4
  }
}

}  // namespace

__attribute__((target("avx2"))) void power2_terms_avx2(const double* w, const double* q,
                                                       double c, double* out, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(_mm256_loadu_pd(q + i), vc);
    __m256d v = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(t, t));
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) {
    double t = q[i] * c;
    out[i] = w[i] * (t * t);
  }
}

__attribute__((target("avx2"))) void power3_terms_avx2(const double* w, const double* q,
                                                       double c, double* out, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(_mm256_loadu_pd(q + i), vc);
    __m256d t3 = _mm256_mul_pd(_mm256_mul_pd(t, t), t);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(w + i), t3));
  }
  for (; i < n; ++i) {
    double t = q[i] * c;
    out[i] = w[i] * ((t * t) * t);
  }
}

__attribute__((target("avx2"))) void double_phase_terms_avx2(const double* w, const double* q,
                                                             double c, int eq, int ep,
                                                             const double* a, double* out,
                                                             std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(_mm256_loadu_pd(q + i), vc);
    __m256d lo = vipow(t, eq);
    __m256d hi = _mm256_mul_pd(_mm256_loadu_pd(a + i), vipow(t, ep));
    __m256d v = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_add_pd(lo, hi));
    _mm256_storeu_pd(out + i, v);
  }
  auto sipow = [](double t, int e) {
    double t2 = t * t;
    return e == 2 ? t2 : (e == 3 ? t2 * t : t2 * t2);
  };
  for (; i < n; ++i) {
    double t = q[i] * c;
    out[i] = w[i] * (sipow(t, eq) + a[i] * sipow(t, ep));
  }
}

}  // namespace fracmod::kernels

#endif
