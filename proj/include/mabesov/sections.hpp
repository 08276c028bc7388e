#pragma once

#include <vector>

#include "mabesov/grid.hpp"

namespace mabesov {

// Empirical structural constants of the section geometry.
struct SectionConstants {
  Scalar a0 = 0;        // quasi-triangle constant of rho_bar
  Scalar theta = 0;     // engulfing constant
  Scalar doubling = 0;  // sup mu(S(x,2t)) / mu(S(x,t)) over admissible samples
  Scalar eps_reg = 0;   // empirical Hoelder regularity exponent of rho_bar, in (0,1]
  int sample_count = 0;
};

// Indices j with rho_bar(x, node_j) < t.
std::vector<Index> section_members(const DiscretizedDomain& g, const ConvexPotential& pot,
                                   const Vector& x, Scalar t);

// Same with a grid node as base point (cached gradients, no pot needed).
std::vector<Index> section_members_node(const DiscretizedDomain& g, Index i, Scalar t);

// mu(S(x,t)) as the weighted sum over members; nondecreasing in t.
Scalar section_measure(const DiscretizedDomain& g, const ConvexPotential& pot, const Vector& x,
                       Scalar t);
Scalar section_measure_node(const DiscretizedDomain& g, Index i, Scalar t);

// True when the members' bounding box, padded by `margin_cells`, stays
// inside the domain box. The grid-level notion of "section inside domain".
bool section_inside_box(const DiscretizedDomain& g, const std::vector<Index>& members,
                        Scalar margin_cells = 1.0);

// Sampling estimators for a0 / theta / doubling / eps_reg. Throws
// NumericError when fewer than 10 valid interior samples survive for any
// estimate; requires samples >= 100.
SectionConstants estimate_constants(const DiscretizedDomain& g, const ConvexPotential& pot,
                                    int samples, std::uint64_t seed);

}  // namespace mabesov
