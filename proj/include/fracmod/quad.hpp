#pragma once

#include <span>
#include <vector>

namespace fracmod {

// Gauss-Legendre rule on [-1,1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Cached; thread-safe. order in [1, 64].
const GaussRule& gauss_legendre(int order);

// Composite 1-d rule: nodes/weights over an explicit panel list.
struct Mesh1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// `panels` uniform panels on [a,b], Gauss-Legendre `order` points each.
Mesh1D uniform_mesh(double a, double b, int panels, int order);

// Symmetric graded mesh for an outer spatial variable: uniform core on
// [-core, core] plus `wing_levels` geometric doubling panels on each side,
// reaching +-core*2^wing_levels.
Mesh1D winged_mesh(double core, int core_panels, int core_order, int wing_levels,
                   int wing_order);

}  // namespace fracmod
