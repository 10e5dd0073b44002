#pragma once

#include <vector>

namespace lfmm {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule, nodes ascending.  Newton iteration on P_n; exact for
/// polynomials of degree 2n - 1.
GaussRule gauss_legendre(int n);

/// The 20-point rule, computed once.
const GaussRule& gauss_legendre_20();

}  // namespace lfmm
