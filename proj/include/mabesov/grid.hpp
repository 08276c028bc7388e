#pragma once

#include <filesystem>

#include "mabesov/potential.hpp"
#include "mabesov/types.hpp"

namespace mabesov {

// Tensor-product midpoint discretization of the domain and of the
// Monge-Ampere measure. Every integral against d(mu) downstream is a
// weighted sum over these nodes.
struct DiscretizedDomain {
  int dim = 1;
  int resolution = 0;  // nodes per axis
  Vector lo, hi;
  Vector cell;              // per-axis cell width
  Scalar cell_volume = 0;   // product of cell widths
  Matrix nodes;             // N x dim, row-major over the tensor grid
  Vector weights;           // ma_density(node) * cell_volume, all > 0
  Matrix node_grads;        // grad phi at nodes (drives rho_bar evaluation)
  Vector node_phis;

  Index size() const { return nodes.rows(); }
  Vector node(Index i) const { return nodes.row(i).transpose(); }

  // rho_bar between grid nodes from cached gradients:
  // (grad phi(y) - grad phi(x)) . (y - x) / 2; the phi terms cancel.
  Scalar rb(Index i, Index j) const {
    return 0.5 * (node_grads.row(j) - node_grads.row(i)).dot(nodes.row(j) - nodes.row(i));
  }
};

// Midpoint-rule grid with `resolution` nodes per axis (>= 16). Verifies
// strict convexity (SPD Hessian) at every node unless the potential allows
// degeneracy, and the grad/hess consistency of the supplied derivatives.
DiscretizedDomain build_grid(const ConvexPotential& pot, int resolution);

// sum_j f_j w_j, i.e. the integral of f against d(mu).
Scalar integrate(const DiscretizedDomain& g, const GridFunction& f);

// Weighted L^p norm, 1 <= p <= inf; p = inf is the plain max over nodes
// (weights are strictly positive, so ess-sup ignores them).
Scalar lp_norm(const DiscretizedDomain& g, const GridFunction& f, Scalar p);

// L^2_mu inner product.
Scalar inner(const DiscretizedDomain& g, const GridFunction& f, const GridFunction& h);

// GridFunction CSV exchange format: header `node_index,value`, one row per node.
void write_grid_function_csv(const std::filesystem::path& path, const GridFunction& f);
GridFunction read_grid_function_csv(const std::filesystem::path& path, Index expected_size);

}  // namespace mabesov
