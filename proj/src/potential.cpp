#include "mabesov/potential.hpp"

#include <cmath>

#include "mabesov/rng.hpp"

namespace mabesov {

bool ConvexPotential::contains(const Vector& x) const {
  if (x.size() != dim) return false;
  for (int d = 0; d < dim; ++d) {
    if (x[d] < lo[d] || x[d] > hi[d]) return false;
  }
  return true;
}

namespace {

void check_box(int dim, const Vector& lo, const Vector& hi) {
  if (dim < 1 || dim > 2) throw ConfigError("potential dimension must be 1 or 2");
  if (lo.size() != dim || hi.size() != dim) throw ConfigError("domain box size mismatch");
  for (int d = 0; d < dim; ++d) {
    if (!(lo[d] < hi[d])) throw ConfigError("empty domain box");
  }
}

void check_point(const ConvexPotential& pot, const Vector& x) {
  if (!pot.contains(x)) throw std::domain_error("point outside the potential domain");
}

}  // namespace

ConvexPotential make_quadratic(int dim, const Vector& lo, const Vector& hi) {
  check_box(dim, lo, hi);
  ConvexPotential p;
  p.dim = dim;
  p.lo = lo;
  p.hi = hi;
  p.name = "quadratic";
  p.phi = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  p.grad = [](const Vector& x) { return x; };
  p.hess = [dim](const Vector&) { return Matrix::Identity(dim, dim); };
  return p;
}

ConvexPotential make_quartic_reg(int dim, const Vector& lo, const Vector& hi) {
  check_box(dim, lo, hi);
  ConvexPotential p;
  p.dim = dim;
  p.lo = lo;
  p.hi = hi;
  p.name = "quartic_reg";
  p.phi = [](const Vector& x) {
    Scalar s = 0;
    for (Index d = 0; d < x.size(); ++d) s += 0.5 * x[d] * x[d] + x[d] * x[d] * x[d] * x[d] / 12.0;
    return s;
  };
  p.grad = [](const Vector& x) {
    Vector g(x.size());
    for (Index d = 0; d < x.size(); ++d) g[d] = x[d] + x[d] * x[d] * x[d] / 3.0;
    return g;
  };
  p.hess = [dim](const Vector& x) {
    Matrix h = Matrix::Zero(dim, dim);
    for (int d = 0; d < dim; ++d) h(d, d) = 1.0 + x[d] * x[d];
    return h;
  };
  return p;
}

ConvexPotential make_anisotropic2d(const Vector& lo, const Vector& hi) {
  check_box(2, lo, hi);
  ConvexPotential p;
  p.dim = 2;
  p.lo = lo;
  p.hi = hi;
  p.name = "anisotropic2d";
  p.phi = [](const Vector& x) {
    return 0.5 * x[0] * x[0] + 0.5 * x[1] * x[1] + x[1] * x[1] * x[1] * x[1] / 12.0;
  };
  p.grad = [](const Vector& x) {
    Vector g(2);
    g[0] = x[0];
    g[1] = x[1] + x[1] * x[1] * x[1] / 3.0;
    return g;
  };
  p.hess = [](const Vector& x) {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 1.0 + x[1] * x[1];
    return h;
  };
  return p;
}

ConvexPotential make_quartic_pure(int dim, const Vector& lo, const Vector& hi) {
  check_box(dim, lo, hi);
  ConvexPotential p;
  p.dim = dim;
  p.lo = lo;
  p.hi = hi;
  p.name = "quartic_pure";
  p.allow_degenerate = true;
  p.phi = [](const Vector& x) {
    Scalar s = 0;
    for (Index d = 0; d < x.size(); ++d) s += x[d] * x[d] * x[d] * x[d];
    return s;
  };
  p.grad = [](const Vector& x) {
    Vector g(x.size());
    for (Index d = 0; d < x.size(); ++d) g[d] = 4.0 * x[d] * x[d] * x[d];
    return g;
  };
  p.hess = [dim](const Vector& x) {
    Matrix h = Matrix::Zero(dim, dim);
    for (int d = 0; d < dim; ++d) h(d, d) = 12.0 * x[d] * x[d];
    return h;
  };
  return p;
}

ConvexPotential potential_by_name(const std::string& name, int dim, const Vector& lo,
                                  const Vector& hi) {
  if (name == "quadratic") return make_quadratic(dim, lo, hi);
  if (name == "quartic_reg") return make_quartic_reg(dim, lo, hi);
  if (name == "anisotropic2d") return make_anisotropic2d(lo, hi);
  if (name == "quartic_pure") return make_quartic_pure(dim, lo, hi);
  throw ConfigError("unknown potential name: " + name);
}

Scalar rho(const ConvexPotential& pot, const Vector& x, const Vector& y) {
  check_point(pot, x);
  check_point(pot, y);
  return pot.phi(y) - pot.phi(x) - pot.grad(x).dot(y - x);
}

Scalar rho_bar(const ConvexPotential& pot, const Vector& x, const Vector& y) {
  check_point(pot, x);
  check_point(pot, y);
  return 0.5 * (pot.grad(y) - pot.grad(x)).dot(y - x);
}

Scalar ma_density(const ConvexPotential& pot, const Vector& x) {
  check_point(pot, x);
  const Matrix h = pot.hess(x);
  const Scalar det = pot.dim == 1 ? h(0, 0) : h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
  if (det <= 0 && !pot.allow_degenerate)
    throw NumericError("non-positive Monge-Ampere density: potential is not strictly convex");
  return det;
}

Scalar derivative_consistency(const ConvexPotential& pot, int samples, std::uint64_t seed) {
  Rng rng(seed);
  Scalar worst = 0;
  for (int s = 0; s < samples; ++s) {
    Vector x(pot.dim);
    for (int d = 0; d < pot.dim; ++d) {
      // stay away from the box edge so that stencils remain inside
      x[d] = pot.lo[d] + pot.width(d) * rng.uniform(0.1, 0.9);
    }
    const Vector g = pot.grad(x);
    const Matrix h = pot.hess(x);
    for (int d = 0; d < pot.dim; ++d) {
      const Scalar step = 1e-5 * std::max(1.0, pot.width(d));
      Vector xp = x, xm = x;
      xp[d] += step;
      xm[d] -= step;
      const Scalar fd_g = (pot.phi(xp) - pot.phi(xm)) / (2 * step);
      const Scalar scale_g = std::max({std::abs(g[d]), std::abs(fd_g), 1.0});
      worst = std::max(worst, std::abs(fd_g - g[d]) / scale_g);
      const Vector gp = pot.grad(xp), gm = pot.grad(xm);
      for (int e = 0; e < pot.dim; ++e) {
        const Scalar fd_h = (gp[e] - gm[e]) / (2 * step);
        const Scalar scale_h = std::max({std::abs(h(e, d)), std::abs(fd_h), 1.0});
        worst = std::max(worst, std::abs(fd_h - h(e, d)) / scale_h);
      }
    }
  }
  return worst;
}

}  // namespace mabesov
