#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fracmod/core.hpp"

namespace fracmod {

// Compactly supported test function with exact gradient and the metadata the
// integrators' certified bounds need. Vanishing outside the support is exact
// by construction, not approximate.
struct TestFunction {
  enum class Kind { zero, polybump, cosbump, tent };

  std::string id;
  int dim = 1;
  bool smooth = true;
  double support_radius = 1.5;  // Euclidean: u == 0 and grad u == 0 for |x| > R
  Point support_box{};          // per-axis halfwidths of a box containing supp u
  double sup_u = 1.0;
  double sup_grad = 1.0;
  double c2_bound = 1.0;        // bound on the Hessian norm (second-order Taylor constant)

  Kind kind = Kind::zero;
  Point center{};
  Point halfwidth{};            // polybump/tent: [0] is the radius; cosbump: per-axis
  double amp = 1.0;

  double eval(std::span<const double> x) const {
    switch (kind) {
      case Kind::zero:
        return 0.0;
      case Kind::polybump: {
        double rho = 0;
        double inv_r2 = 1.0 / (halfwidth[0] * halfwidth[0]);
        for (int i = 0; i < dim; ++i) {
          double d = x[i] - center[i];
          rho += d * d;
        }
        rho *= inv_r2;
        if (rho >= 1.0) return 0.0;
        double b = 1.0 - rho;
        return amp * b * b * b;
      }
      case Kind::cosbump: {
        double v = amp;
        for (int i = 0; i < dim; ++i) {
          double th = 0.5 * M_PI * (x[i] - center[i]) / halfwidth[i];
          if (th <= -0.5 * M_PI || th >= 0.5 * M_PI) return 0.0;
          double c = std::cos(th);
          v *= c * c;
        }
        return v;
      }
      case Kind::tent: {
        double r = 0;
        for (int i = 0; i < dim; ++i) {
          double d = x[i] - center[i];
          r += d * d;
        }
        r = std::sqrt(r) / halfwidth[0];
        return r >= 1.0 ? 0.0 : amp * (1.0 - r);
      }
    }
    return 0.0;
  }

  void gradient(std::span<const double> x, std::span<double> out) const {
    for (int i = 0; i < dim; ++i) out[i] = 0.0;
    switch (kind) {
      case Kind::zero:
        return;
      case Kind::polybump: {
        double rho = 0;
        double inv_r2 = 1.0 / (halfwidth[0] * halfwidth[0]);
        for (int i = 0; i < dim; ++i) {
          double d = x[i] - center[i];
          rho += d * d;
        }
        rho *= inv_r2;
        if (rho >= 1.0) return;
        double b = 1.0 - rho;
        double f = -6.0 * amp * b * b * inv_r2;
        for (int i = 0; i < dim; ++i) out[i] = f * (x[i] - center[i]);
        return;
      }
      case Kind::cosbump: {
        double prod[kMaxDim], theta[kMaxDim];
        for (int i = 0; i < dim; ++i) {
          double th = 0.5 * M_PI * (x[i] - center[i]) / halfwidth[i];
          if (th <= -0.5 * M_PI || th >= 0.5 * M_PI) return;
          theta[i] = th;
          double c = std::cos(th);
          prod[i] = c * c;
        }
        for (int i = 0; i < dim; ++i) {
          double v = -amp * 0.5 * M_PI / halfwidth[i] * std::sin(2.0 * theta[i]);
          for (int j = 0; j < dim; ++j)
            if (j != i) v *= prod[j];
          out[i] = v;
        }
        return;
      }
      case Kind::tent: {
        double r = 0;
        for (int i = 0; i < dim; ++i) {
          double d = x[i] - center[i];
          r += d * d;
        }
        r = std::sqrt(r);
        if (r == 0.0 || r >= halfwidth[0]) return;  // a.e. gradient; 0 at the apex
        double f = -amp / (halfwidth[0] * r);
        for (int i = 0; i < dim; ++i) out[i] = f * (x[i] - center[i]);
        return;
      }
    }
  }

  double grad_norm(std::span<const double> x) const {
    double g[kMaxDim];
    gradient(x, std::span<double>(g, dim));
    double s = 0;
    for (int i = 0; i < dim; ++i) s += g[i] * g[i];
    return std::sqrt(s);
  }

  // support_box is origin-centered; true iff x lies within margin of it
  bool within_box(std::span<const double> x, double margin) const {
    for (int i = 0; i < dim; ++i)
      if (std::abs(x[i]) > support_box[i] + margin) return false;
    return true;
  }
};

// Bank of named members for n in {1,2,3}: polynomial bump, cosine bump,
// translated/anisotropically scaled variants, the zero function, and the
// non-smooth tent control.
std::vector<TestFunction> bank(int n);
const TestFunction bank_member(int n, std::string_view id);

// Max over random interior points of |grad u - central difference|.
double finite_difference_check(const TestFunction& u, int points, double h, std::uint64_t seed);

}  // namespace fracmod
