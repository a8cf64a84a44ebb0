#include "fracmod/sphere.hpp"

#include <cmath>
#include <stdexcept>

#include "fracmod/quad.hpp"

namespace fracmod {

SphereRule sphere_rule(int n, int order) {
  if (order < 1) throw std::invalid_argument("sphere_rule: order must be >= 1");
  SphereRule r;
  r.dim = n;
  switch (n) {
    case 1: {
      r.nodes = {Point{-1.0, 0.0, 0.0}, Point{1.0, 0.0, 0.0}};
      r.weights = {1.0, 1.0};
      break;
    }
    case 2: {
      // midpoint angles avoid nodes with w_n exactly 0
      r.nodes.reserve(order);
      r.weights.assign(order, 2.0 * M_PI / order);
      for (int j = 0; j < order; ++j) {
        double th = 2.0 * M_PI * (j + 0.5) / order;
        r.nodes.push_back(Point{std::cos(th), std::sin(th), 0.0});
      }
      break;
    }
    case 3: {
      // polar cosine c on [-1,0] and [0,1] separately: |c|^kappa has its
      // singularity at a panel endpoint, where Gauss-Legendre converges fast
      const GaussRule& gl = gauss_legendre(order);
      r.nodes.reserve(static_cast<std::size_t>(2 * order) * order);
      r.weights.reserve(r.nodes.capacity());
      for (int half = 0; half < 2; ++half) {
        double lo = half == 0 ? -1.0 : 0.0;
        for (int i = 0; i < order; ++i) {
          double c = lo + 0.5 * (1.0 + gl.x[i]);
          double wc = 0.5 * gl.w[i];
          double sc = std::sqrt(std::max(0.0, 1.0 - c * c));
          for (int j = 0; j < order; ++j) {
            double phi = 2.0 * M_PI * (j + 0.5) / order;
            r.nodes.push_back(Point{sc * std::cos(phi), sc * std::sin(phi), c});
            r.weights.push_back(wc * 2.0 * M_PI / order);
          }
        }
      }
      break;
    }
    default:
      throw std::invalid_argument(
          "sphere_rule: only n in {1,2,3} has deterministic rules; higher n is served by the"
          " Monte Carlo modular path");
  }
  return r;
}

double surface_measure(int n) {
  if (n <= 0) throw std::domain_error("surface_measure: n must be positive");
  double omega = std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  return n * omega;
}

double sphere_abs_moment(double kappa, const SphereRule& rule) {
  double s = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    double a = std::abs(rule.wn(i));
    s += rule.weights[i] * (a > 0 ? std::pow(a, kappa) : 0.0);
  }
  return s;
}

double moment_K(int n, double kappa, const SphereRule& rule) {
  if (kappa <= 0) throw std::domain_error("moment_K: kappa must be positive");
  if (rule.dim != n) throw std::invalid_argument("moment_K: rule dimension mismatch");
  return sphere_abs_moment(kappa, rule) / kappa;
}

double moment_K_closed(int n, double kappa) {
  if (kappa <= 0) throw std::domain_error("moment_K_closed: kappa must be positive");
  // (1/kappa) * 2 pi^{(n-1)/2} Gamma((kappa+1)/2) / Gamma((n+kappa)/2)
  return 2.0 * std::pow(M_PI, 0.5 * (n - 1)) * std::tgamma(0.5 * (kappa + 1.0)) /
         std::tgamma(0.5 * (n + kappa)) / kappa;
}

double moment_Klog(int n, double p, const SphereRule& rule) {
  if (rule.dim != n) throw std::invalid_argument("moment_Klog: rule dimension mismatch");
  double s = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    double a = std::abs(rule.wn(i));
    if (a < 1e-300) continue;  // t^p log t -> 0
    s += rule.weights[i] * std::pow(a, p) * std::log(a);
  }
  return s / p;
}

}  // namespace fracmod
