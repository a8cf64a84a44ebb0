#include <doctest.h>

#include <cmath>

#include "fracmod/test_functions.hpp"

using namespace fracmod;

TEST_CASE("bank membership and basic values") {
  for (int n : {1, 2, 3}) {
    auto fns = bank(n);
    CHECK(fns.size() >= 5);
    const TestFunction& poly = bank_member(n, "polybump");
    Point zero{};
    CHECK(poly.eval(std::span<const double>(zero.data(), n)) == doctest::Approx(1.0));
    double g[kMaxDim];
    poly.gradient(std::span<const double>(zero.data(), n), std::span<double>(g, n));
    for (int i = 0; i < n; ++i) CHECK(g[i] == 0.0);  // symmetry at the peak
    CHECK(poly.support_radius > 1.0);                // every member clears the unit shell
    for (const auto& f : fns) CHECK(f.support_radius > 1.0);
  }
  CHECK_THROWS(bank(4));
  CHECK_THROWS(bank_member(1, "no-such-fn"));
}

TEST_CASE("smooth members pass the finite-difference gradient check") {
  for (int n : {1, 2, 3}) {
    for (const auto& f : bank(n)) {
      if (!f.smooth || f.sup_u == 0) continue;
      double dev = finite_difference_check(f, 100, 1e-5, 12345);
      INFO(f.id << " n=" << n << " dev=" << dev);
      CHECK(dev <= 1e-6);
    }
  }
}

TEST_CASE("support is exact: u and grad u vanish identically outside B_R") {
  SplitMix64 rng(99);
  for (int n : {1, 2, 3}) {
    for (const auto& f : bank(n)) {
      for (int it = 0; it < 10000 / n; ++it) {
        // random exterior point in the shell (R, 3R]
        Point x{};
        double r2 = 0;
        for (int i = 0; i < n; ++i) {
          x[i] = rng.uniform(-1.0, 1.0);
          r2 += x[i] * x[i];
        }
        double scale = f.support_radius * rng.uniform(1.0 + 1e-12, 3.0) / std::sqrt(r2);
        for (int i = 0; i < n; ++i) x[i] *= scale;
        std::span<const double> xs(x.data(), n);
        REQUIRE(f.eval(xs) == 0.0);
        double g[kMaxDim];
        f.gradient(xs, std::span<double>(g, n));
        for (int i = 0; i < n; ++i) REQUIRE(g[i] == 0.0);
      }
    }
  }
}

TEST_CASE("declared sup bounds hold on samples") {
  SplitMix64 rng(7);
  for (int n : {1, 2}) {
    for (const auto& f : bank(n)) {
      for (int it = 0; it < 2000; ++it) {
        Point x{};
        for (int i = 0; i < n; ++i) x[i] = rng.uniform(-1.0, 1.0) * f.support_box[i];
        std::span<const double> xs(x.data(), n);
        CHECK(std::abs(f.eval(xs)) <= f.sup_u * (1 + 1e-12));
        if (f.smooth) CHECK(f.grad_norm(xs) <= f.sup_grad * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("zero function") {
  const TestFunction& z = bank_member(2, "zero");
  Point x{0.3, 0.1, 0};
  CHECK(z.eval(std::span<const double>(x.data(), 2)) == 0.0);
  CHECK(finite_difference_check(z, 10, 1e-5, 1) == 0.0);
}

TEST_CASE("tent: central difference across the support edge misses the kink") {
  const TestFunction& t = bank_member(1, "tent");
  CHECK(!t.smooth);
  // straddle the kink at |x| = R: the a.e. gradient there is 0 (outside
  // branch), while the symmetric difference sees half the interior slope
  Point edge{t.support_radius, 0, 0};
  std::span<const double> xs(edge.data(), 1);
  double h = 1e-3;
  Point xp{edge[0] + h, 0, 0}, xm{edge[0] - h, 0, 0};
  double fd = (t.eval(std::span<const double>(xp.data(), 1)) -
               t.eval(std::span<const double>(xm.data(), 1))) /
              (2 * h);
  double g[1];
  t.gradient(xs, std::span<double>(g, 1));
  CHECK(std::abs(fd - g[0]) > 0.1);  // O(1) deviation, the negative control
}
