#include "mabesov/sections.hpp"

#include <algorithm>
#include <cmath>

#include "mabesov/rng.hpp"

namespace mabesov {

std::vector<Index> section_members(const DiscretizedDomain& g, const ConvexPotential& pot,
                                   const Vector& x, Scalar t) {
  if (!pot.contains(x)) throw std::domain_error("section base point outside domain");
  if (!(t > 0)) throw std::invalid_argument("section parameter t must be positive");
  const Vector gx = pot.grad(x);
  std::vector<Index> out;
  for (Index j = 0; j < g.size(); ++j) {
    const Scalar rb = 0.5 * (g.node_grads.row(j).transpose() - gx).dot(g.node(j) - x);
    if (rb < t) out.push_back(j);
  }
  return out;
}

std::vector<Index> section_members_node(const DiscretizedDomain& g, Index i, Scalar t) {
  if (!(t > 0)) throw std::invalid_argument("section parameter t must be positive");
  std::vector<Index> out;
  for (Index j = 0; j < g.size(); ++j)
    if (g.rb(i, j) < t) out.push_back(j);
  return out;
}

Scalar section_measure(const DiscretizedDomain& g, const ConvexPotential& pot, const Vector& x,
                       Scalar t) {
  Scalar s = 0;
  for (Index j : section_members(g, pot, x, t)) s += g.weights[j];
  return s;
}

Scalar section_measure_node(const DiscretizedDomain& g, Index i, Scalar t) {
  Scalar s = 0;
  for (Index j : section_members_node(g, i, t)) s += g.weights[j];
  return s;
}

bool section_inside_box(const DiscretizedDomain& g, const std::vector<Index>& members,
                        Scalar margin_cells) {
  if (members.empty()) return false;
  for (int d = 0; d < g.dim; ++d) {
    Scalar mn = kInf, mx = -kInf;
    for (Index j : members) {
      mn = std::min(mn, g.nodes(j, d));
      mx = std::max(mx, g.nodes(j, d));
    }
    const Scalar pad = margin_cells * g.cell[d];
    if (mn - pad < g.lo[d] || mx + pad > g.hi[d]) return false;
  }
  return true;
}

namespace {

// least-squares slope of y against x
Scalar ls_slope(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
  const Scalar n = static_cast<Scalar>(x.size());
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const Scalar den = n * sxx - sx * sx;
  if (den <= 0) return 0;
  return (n * sxy - sx * sy) / den;
}

Scalar ls_intercept(const std::vector<Scalar>& x, const std::vector<Scalar>& y, Scalar slope) {
  Scalar sx = 0, sy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  return (sy - slope * sx) / static_cast<Scalar>(x.size());
}

}  // namespace

SectionConstants estimate_constants(const DiscretizedDomain& g, const ConvexPotential& pot,
                                    int samples, std::uint64_t seed) {
  if (samples < 100) throw std::invalid_argument("estimate_constants needs samples >= 100");
  const Index n = g.size();
  SectionConstants out;
  out.sample_count = samples;

  // --- quasi-triangle constant a0 ------------------------------------
  // Random triples, alternated with constructed near-midpoint triples which
  // attain the supremum for smooth potentials.
  {
    Rng rng(split_mix(seed ^ 0xa0a0a0a0ull));
    int valid = 0;
    for (int s = 0; s < samples; ++s) {
      const Index i = rng.index(n), j = rng.index(n);
      if (i == j) continue;
      Index z;
      if (s % 2 == 0) {
        z = rng.index(n);
      } else {
        // nearest node to the Euclidean midpoint
        const Vector mid = 0.5 * (g.node(i) + g.node(j));
        Index best = 0;
        Scalar bd = kInf;
        for (Index m = 0; m < n; ++m) {
          const Scalar d = (g.node(m) - mid).squaredNorm();
          if (d < bd) {
            bd = d;
            best = m;
          }
        }
        z = best;
      }
      if (z == i || z == j) continue;
      const Scalar den = g.rb(i, z) + g.rb(z, j);
      if (den <= 0) continue;
      out.a0 = std::max(out.a0, g.rb(i, j) / den);
      ++valid;
    }
    if (valid < 10) throw NumericError("estimate_constants: too few valid a0 samples");
  }

  // --- engulfing constant theta ---------------------------------------
  // For x in S(y,t), the least tau with S(y,t) subset of S(x,tau t) is the
  // member maximum of rho_bar(x,.)/t. Base points whose dilated section
  // leaves the box are skipped; boundary-approaching x attain the constant.
  {
    Rng rng(split_mix(seed ^ 0x7e7a7e7aull));
    int valid = 0;
    for (int s = 0; s < samples; ++s) {
      const Index y = rng.index(n);
      // log-uniform t over the resolvable range
      const Scalar t_cell = 8.0 * g.cell.minCoeff() * g.cell.minCoeff();
      const Scalar t_big = 0.05 * g.rb(0, n - 1) + t_cell;
      const Scalar t = t_cell * std::pow(t_big / t_cell, rng.uniform());
      const auto members = section_members_node(g, y, t);
      if (members.size() < 8) continue;
      if (!section_inside_box(g, members)) continue;
      // boundary-approaching x: the member farthest from y, plus one random
      for (int pick = 0; pick < 2; ++pick) {
        Index x = members[0];
        if (pick == 0) {
          Scalar best = -1;
          for (Index m : members)
            if (g.rb(y, m) > best) {
              best = g.rb(y, m);
              x = m;
            }
        } else {
          x = members[rng.index(static_cast<Index>(members.size()))];
        }
        Scalar tau = 0;
        for (Index m : members) tau = std::max(tau, g.rb(x, m) / t);
        if (tau <= 0) continue;
        const auto engulfed = section_members_node(g, x, tau * t * (1 + 1e-12));
        if (!section_inside_box(g, engulfed)) continue;
        out.theta = std::max(out.theta, tau);
        ++valid;
      }
    }
    if (valid < 10) throw NumericError("estimate_constants: too few valid theta samples");
  }

  // --- doubling constant ----------------------------------------------
  // mu(S(x,2t))/mu(S(x,t)) restricted to doubled sections that stay inside
  // the box; sections below ~128 member nodes are skipped as unresolved.
  {
    Rng rng(split_mix(seed ^ 0xd0b1d0b1ull));
    const Index min_members = g.dim == 1 ? 128 : 100;
    int valid = 0;
    for (int s = 0; s < samples; ++s) {
      const Index x = rng.index(n);
      const Scalar t_cell = 512.0 * g.cell.minCoeff() * g.cell.minCoeff();
      const Scalar t_big = 0.1 * g.rb(0, n - 1) + t_cell;
      const Scalar t = t_cell * std::pow(t_big / t_cell, rng.uniform());
      const auto small = section_members_node(g, x, t);
      if (static_cast<Index>(small.size()) < min_members) continue;
      const auto big = section_members_node(g, x, 2 * t);
      if (!section_inside_box(g, big)) continue;
      Scalar ms = 0, mb = 0;
      for (Index m : small) ms += g.weights[m];
      for (Index m : big) mb += g.weights[m];
      if (ms <= 0) continue;
      out.doubling = std::max(out.doubling, mb / ms);
      ++valid;
    }
    if (valid < 10) throw NumericError("estimate_constants: too few valid doubling samples");
  }

  // --- regularity exponent eps_reg ------------------------------------
  // Fit |rho_bar(x,y) - rho_bar(x',y)| <= C rho_bar(x,x')^eps
  // [rho_bar(x,y)+rho_bar(x',y)]^(1-eps) as the constrained regression
  // (z - v) = c + eps (u - v); two-stage with 95th-percentile trimming.
  {
    Rng rng(split_mix(seed ^ 0xe95e95ull));
    std::vector<Scalar> xs, ys;
    for (int s = 0; s < 4 * samples; ++s) {
      const Index x = rng.index(n), y = rng.index(n);
      if (x == y) continue;
      // x' within a modest neighborhood of x so that separations spread
      // across scales below rho_bar(x,y)
      const Index xp = std::clamp<Index>(
          x + static_cast<Index>(std::round(rng.normal() * 0.02 * static_cast<Scalar>(n))),
          0, n - 1);
      if (xp == x || xp == y) continue;
      const Scalar rxx = g.rb(x, xp);
      const Scalar rxy = g.rb(x, y), rxpy = g.rb(xp, y);
      const Scalar dz = std::abs(rxy - rxpy);
      if (rxx <= 0 || rxy + rxpy <= 0 || dz <= 0) continue;
      if (rxx > 0.25 * (rxy + rxpy)) continue;  // separated regime
      const Scalar u = std::log(rxx), v = std::log(rxy + rxpy), z = std::log(dz);
      xs.push_back(u - v);
      ys.push_back(z - v);
    }
    if (xs.size() < 10) throw NumericError("estimate_constants: too few valid eps_reg samples");
    Scalar slope = ls_slope(xs, ys);
    const Scalar icpt = ls_intercept(xs, ys, slope);
    std::vector<Scalar> resid(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) resid[i] = std::abs(ys[i] - icpt - slope * xs[i]);
    std::vector<Scalar> sorted = resid;
    std::sort(sorted.begin(), sorted.end());
    const Scalar cut = sorted[static_cast<size_t>(0.95 * static_cast<Scalar>(sorted.size() - 1))];
    std::vector<Scalar> xs2, ys2;
    for (size_t i = 0; i < xs.size(); ++i) {
      if (resid[i] <= cut) {
        xs2.push_back(xs[i]);
        ys2.push_back(ys[i]);
      }
    }
    slope = ls_slope(xs2, ys2);
    out.eps_reg = std::clamp(slope, 1e-6, 1.0);
  }

  return out;
}

}  // namespace mabesov
