#pragma once

#include <vector>

#include "fracmod/core.hpp"

namespace fracmod {

// Quadrature rule on the unit sphere S^{n-1}, n in {1,2,3}. Nodes are unit
// vectors; weights sum to the surface measure n*omega_n.
struct SphereRule {
  int dim = 0;
  std::vector<Point> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  // n-th coordinate of node i (the moment variable w_n)
  double wn(std::size_t i) const { return nodes[i][dim - 1]; }
};

// n=1: the two points {-1,+1}, weight 1 each.
// n=2: `order` equispaced midpoint angles, weight 2*pi/order.
// n=3: Gauss-Legendre in the polar cosine (split at 0 so |w_n|^kappa moments
//      converge fast) times `order` equispaced midpoint azimuths.
SphereRule sphere_rule(int n, int order);

// Surface measure of S^{n-1}: n*omega_n, omega_n = pi^{n/2}/Gamma(n/2+1).
double surface_measure(int n);

// K_{n,kappa} = (1/kappa) * integral over S^{n-1} of |w_n|^kappa.
double moment_K(int n, double kappa, const SphereRule& rule);

// Closed form of the same moment via Gamma functions; cross-check oracle.
double moment_K_closed(int n, double kappa);

// K_{log,n,p} = (1/p) * integral of |w_n|^p log|w_n|  (<= 0; integrand
// extended by 0 at w_n = 0, the removable limit).
double moment_Klog(int n, double p, const SphereRule& rule);

// integral of |w_n|^kappa over the rule (no 1/kappa factor)
double sphere_abs_moment(double kappa, const SphereRule& rule);

}  // namespace fracmod
