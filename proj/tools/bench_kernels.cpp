// Microbenchmark for the modular accumulation kernels: scalar reference vs
// the runtime-dispatched AVX2 variant, plus the pairwise reduction.
//
//   cmake -S . -B build -DFRACMOD_BENCH=ON && cmake --build build
//   ./build/bench_kernels

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "fracmod/core.hpp"
#include "fracmod/kernels.hpp"

using namespace fracmod;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
             .count() /
         reps;
}

}  // namespace

int main() {
  const std::size_t n = 1 << 21;
  SplitMix64 rng(1);
  std::vector<double> w(n), q(n), a(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = rng.uniform(0.0, 1.0);
    q[i] = rng.uniform(0.0, 2.0);
    a[i] = rng.uniform(0.5, 1.5);
  }
  std::printf("terms: %zu, active lane: %s\n", n, kernels::simd_name());

  struct Case {
    const char* name;
    std::function<void()> body;
  };
  std::vector<Case> cases = {
      {"power p=2", [&] { kernels::power_terms(w, q, 0.9, 2.0, out); }},
      {"power p=3", [&] { kernels::power_terms(w, q, 0.9, 3.0, out); }},
      {"power p=2.5 (scalar pow)", [&] { kernels::power_terms(w, q, 0.9, 2.5, out); }},
      {"double phase q=2 p=3", [&] { kernels::double_phase_terms(w, q, 0.9, 2.0, 3.0, a, out); }},
      {"pairwise sum", [&] { volatile double r = kernels::pairwise_sum(out); (void)r; }},
  };
  for (auto& c : cases) {
    bool prev = kernels::force_scalar(true);
    double scalar_ms = time_ms(8, c.body);
    kernels::force_scalar(false);
    double simd_ms = time_ms(8, c.body);
    kernels::force_scalar(prev);
    std::printf("%-26s scalar %8.3f ms   dispatched %8.3f ms   speedup %.2fx\n", c.name,
                scalar_ms, simd_ms, scalar_ms / simd_ms);
  }
  return 0;
}
