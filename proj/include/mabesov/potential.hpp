#pragma once

#include <functional>
#include <string>

#include "mabesov/types.hpp"

namespace mabesov {

// Strictly convex smooth potential on an axis-aligned box. Generates the
// whole geometry: the Monge-Ampere density det D^2(phi), the quasi-metric
// rho_bar and the sections S(x,t).
struct ConvexPotential {
  int dim = 1;
  std::function<Scalar(const Vector&)> phi;
  std::function<Vector(const Vector&)> grad;
  std::function<Matrix(const Vector&)> hess;
  Vector lo, hi;  // domain box corners
  std::string name;
  // Accept a Hessian that degenerates somewhere (oracle potentials such as
  // quartic_pure). Off by default; strict convexity is the standing
  // hypothesis.
  bool allow_degenerate = false;

  bool contains(const Vector& x) const;
  Scalar width(int axis) const { return hi[axis] - lo[axis]; }
};

// Catalogue addressed by name in the CLI config.
ConvexPotential make_quadratic(int dim, const Vector& lo, const Vector& hi);
ConvexPotential make_quartic_reg(int dim, const Vector& lo, const Vector& hi);
ConvexPotential make_anisotropic2d(const Vector& lo, const Vector& hi);
ConvexPotential make_quartic_pure(int dim, const Vector& lo, const Vector& hi);
ConvexPotential potential_by_name(const std::string& name, int dim, const Vector& lo,
                                  const Vector& hi);

// rho(x,y) = phi(y) - phi(x) - grad phi(x) . (y - x); nonnegative by
// convexity, zero iff x == y for strictly convex phi.
Scalar rho(const ConvexPotential& pot, const Vector& x, const Vector& y);

// Symmetrized quasi-metric rho_bar = (rho(x,y) + rho(y,x)) / 2. Evaluated as
// (grad phi(y) - grad phi(x)) . (y - x) / 2, which is symmetric to the last bit.
Scalar rho_bar(const ConvexPotential& pot, const Vector& x, const Vector& y);

// det D^2 phi(x) > 0; throws NumericError on a non-positive determinant
// unless the potential allows degeneracy.
Scalar ma_density(const ConvexPotential& pot, const Vector& x);

// Max relative disagreement between the supplied grad/hess and centered
// finite differences of phi at random interior points.
Scalar derivative_consistency(const ConvexPotential& pot, int samples, std::uint64_t seed);

}  // namespace mabesov
