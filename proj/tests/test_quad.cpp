#include <doctest.h>

#include <cmath>

#include "fracmod/quad.hpp"

using namespace fracmod;

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly") {
  for (int order : {2, 4, 8, 16}) {
    const GaussRule& gl = gauss_legendre(order);
    // int_{-1}^{1} x^{2k} dx = 2/(2k+1)
    for (int k = 0; 2 * k + 1 <= 2 * order - 1; ++k) {
      double acc = 0;
      for (std::size_t i = 0; i < gl.x.size(); ++i) acc += gl.w[i] * std::pow(gl.x[i], 2 * k);
      CHECK(acc == doctest::Approx(2.0 / (2 * k + 1)).epsilon(1e-13));
    }
    double total = 0;
    for (double w : gl.w) total += w;
    CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("uniform mesh integrates smooth functions") {
  Mesh1D m = uniform_mesh(0.0, M_PI, 8, 8);
  double acc = 0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) acc += m.weights[i] * std::sin(m.nodes[i]);
  CHECK(acc == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("winged mesh covers the geometric wings") {
  Mesh1D m = winged_mesh(1.0, 4, 4, 3, 4);
  // integral of exp(-|x|) over [-8, 8]
  double acc = 0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    acc += m.weights[i] * std::exp(-std::abs(m.nodes[i]));
  CHECK(acc == doctest::Approx(2.0 * (1.0 - std::exp(-8.0))).epsilon(1e-5));
  double lo = 0, hi = 0;
  for (double x : m.nodes) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(hi > 4.0);
  CHECK(hi < 8.0);
  CHECK(lo < -4.0);
}
