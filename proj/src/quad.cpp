#include "fracmod/quad.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace fracmod {

namespace {

GaussRule compute_gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  // Newton iteration on P_n, Chebyshev-like initial guesses.
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  if (order < 1 || order > 64) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

Mesh1D uniform_mesh(double a, double b, int panels, int order) {
  const GaussRule& gl = gauss_legendre(order);
  Mesh1D m;
  m.nodes.reserve(static_cast<std::size_t>(panels) * order);
  m.weights.reserve(m.nodes.capacity());
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h, mid = lo + 0.5 * h;
    for (int j = 0; j < order; ++j) {
      m.nodes.push_back(mid + 0.5 * h * gl.x[j]);
      m.weights.push_back(0.5 * h * gl.w[j]);
    }
  }
  return m;
}

Mesh1D winged_mesh(double core, int core_panels, int core_order, int wing_levels,
                   int wing_order) {
  Mesh1D m = uniform_mesh(-core, core, core_panels, core_order);
  const GaussRule& gl = gauss_legendre(wing_order);
  for (int lev = 0; lev < wing_levels; ++lev) {
    double lo = core * std::ldexp(1.0, lev);
    double hi = 2.0 * lo;
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int j = 0; j < wing_order; ++j) {
      for (double sgn : {1.0, -1.0}) {
        m.nodes.push_back(sgn * (mid + half * gl.x[j]));
        m.weights.push_back(half * gl.w[j]);
      }
    }
  }
  return m;
}

}  // namespace fracmod
