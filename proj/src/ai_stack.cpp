#include "mabesov/ai_stack.hpp"

#include <algorithm>
#include <cmath>

#include "mabesov/parallel.hpp"
#include "mabesov/rng.hpp"

namespace mabesov {

namespace {

Scalar dyadic(int k) { return std::ldexp(1.0, -k); }  // 2^-k

// a0-only sampling estimate (random triples plus near-midpoint triples)
Scalar estimate_a0(const DiscretizedDomain& g, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const Index n = g.size();
  Scalar a0 = 1.0;
  for (int s = 0; s < samples; ++s) {
    const Index i = rng.index(n), j = rng.index(n);
    if (i == j) continue;
    Index z = rng.index(n);
    if (s % 2) {
      const Vector mid = 0.5 * (g.node(i) + g.node(j));
      Scalar bd = kInf;
      for (Index m = 0; m < n; ++m) {
        const Scalar d = (g.node(m) - mid).squaredNorm();
        if (d < bd) {
          bd = d;
          z = m;
        }
      }
    }
    if (z == i || z == j) continue;
    const Scalar den = g.rb(i, z) + g.rb(z, j);
    if (den > 0) a0 = std::max(a0, g.rb(i, j) / den);
  }
  return a0;
}

struct TkData {
  KernelMatrix T;
  Vector T1;
  Vector V;
  Mask mask;
};

TkData assemble_Tk_data(const DiscretizedDomain& g, int k, const BumpProfile& profile) {
  const Index n = g.size();
  const Scalar scale = std::ldexp(1.0, k);
  std::vector<std::vector<std::pair<Index, Scalar>>> rows(n);
  Vector V = Vector::Zero(n);

  parallel_for(n, [&](Index i) {
    auto& row = rows[i];
    for (Index j = 0; j < n; ++j) {
      const Scalar rb = g.rb(i, j);
      const Scalar r = scale * rb;
      if (r < profile.r2) {
        row.emplace_back(j, profile(r));
        if (r < 1.0) V[i] += g.weights[j];
      }
    }
  });

  TkData out;
  out.T.resize(n, n);
  std::vector<Eigen::Triplet<Scalar>> trips;
  std::size_t nnz = 0;
  for (const auto& row : rows) nnz += row.size();
  trips.reserve(nnz);
  for (Index i = 0; i < n; ++i)
    for (const auto& [j, v] : rows[i]) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  out.T.setFromTriplets(trips.begin(), trips.end());
  out.T.makeCompressed();
  out.T1 = out.T * g.weights;
  out.V = V;

  // Interior mask: node i is interior when no node z reachable by one
  // kernel hop has a clipped hop-ball of its own (bounding box within one
  // cell of the domain edge). Matches the support structure of S_k = MTWTM.
  Mask clipped(n, 0);
  for (Index z = 0; z < n; ++z) {
    Vector mn = Vector::Constant(g.dim, kInf), mx = Vector::Constant(g.dim, -kInf);
    for (KernelMatrix::InnerIterator it(out.T, z); it; ++it) {  // column z == row z by symmetry
      for (int d = 0; d < g.dim; ++d) {
        mn[d] = std::min(mn[d], g.nodes(it.row(), d));
        mx[d] = std::max(mx[d], g.nodes(it.row(), d));
      }
    }
    for (int d = 0; d < g.dim; ++d)
      if (mn[d] - g.cell[d] < g.lo[d] || mx[d] + g.cell[d] > g.hi[d]) clipped[z] = 1;
  }
  out.mask.assign(n, 1);
  for (Index i = 0; i < n; ++i) {
    for (KernelMatrix::InnerIterator it(out.T, i); it && out.mask[i]; ++it)
      if (clipped[it.row()]) out.mask[i] = 0;
  }
  return out;
}

KernelMatrix assemble_Sk_from(const DiscretizedDomain& g, const TkData& tk) {
  const Index n = g.size();
  for (Index i = 0; i < n; ++i)
    if (!(tk.T1[i] > 0))
      throw NumericError("T_k(1) vanished at a node: section contains no grid point at this scale");
  const Vector M = tk.T1.cwiseInverse();
  const Vector TM = tk.T * g.weights.cwiseProduct(M);
  for (Index i = 0; i < n; ++i)
    if (!(TM[i] > 0)) throw NumericError("T_k(M) vanished at a node");
  const Vector W = TM.cwiseInverse();

  KernelMatrix A = tk.T * g.weights.cwiseProduct(W).asDiagonal();
  KernelMatrix B = A * tk.T;
  KernelMatrix S = M.asDiagonal() * B;
  S = S * M.asDiagonal();
  KernelMatrix St = S.transpose();
  S = 0.5 * (S + St);
  S.prune(0.0);
  S.makeCompressed();
  return S;
}

std::vector<Index> masked_nodes(const Mask& m) {
  std::vector<Index> out;
  for (Index i = 0; i < static_cast<Index>(m.size()); ++i)
    if (m[i]) out.push_back(i);
  return out;
}

}  // namespace

Index AIStack::mask_count(int k) const {
  const auto it = mask.find(k);
  if (it == mask.end()) return 0;
  Index c = 0;
  for (auto b : it->second) c += b;
  return c;
}

KernelMatrix assemble_Tk(const DiscretizedDomain& g, const ConvexPotential& pot, int k,
                         const BumpProfile& profile, Vector* Vk) {
  (void)pot;
  TkData tk = assemble_Tk_data(g, k, profile);
  if (masked_nodes(tk.mask).empty())
    throw NumericError("scale out of range: empty interior mask at k=" + std::to_string(k));
  if (Vk) *Vk = tk.V;
  return tk.T;
}

KernelMatrix assemble_Sk(const DiscretizedDomain& g, const ConvexPotential& pot, int k,
                         const BumpProfile& profile) {
  (void)pot;
  TkData tk = assemble_Tk_data(g, k, profile);
  if (masked_nodes(tk.mask).empty())
    throw NumericError("scale out of range: empty interior mask at k=" + std::to_string(k));
  return assemble_Sk_from(g, tk);
}

std::pair<int, int> admissible_scale_range(const DiscretizedDomain& g, const ConvexPotential& pot,
                                           Scalar a0) {
  (void)pot;
  if (a0 <= 0) a0 = estimate_a0(g, 400, 0xa11ceull);
  const Index n = g.size();
  // probe nodes: center plus mid-quadrant nodes
  std::vector<Index> probes{n / 2};
  if (g.dim == 1) {
    probes.push_back(n / 4);
    probes.push_back(3 * n / 4);
  } else {
    const Index r = g.resolution;
    probes = {r / 2 * r + r / 2, r / 4 * r + r / 4, 3 * r / 4 * r + 3 * r / 4};
  }

  const Scalar rb_span = std::max(g.rb(0, n - 1), 16 * g.cell.minCoeff() * g.cell.minCoeff());
  const int k_lo = static_cast<int>(std::floor(-std::log2(rb_span * a0))) - 3;
  const int k_hi = static_cast<int>(std::ceil(-std::log2(g.cell.minCoeff() * g.cell.minCoeff()))) + 3;

  auto support_ok = [&](int k) {
    // kernel support radius at most a quarter of the domain width
    for (Index p : probes) {
      const auto members = section_members_node(g, p, a0 * 4.0 * dyadic(k));
      for (int d = 0; d < g.dim; ++d) {
        Scalar radius = 0;
        for (Index m : members)
          radius = std::max(radius, std::abs(g.nodes(m, d) - g.nodes(p, d)));
        if (radius > 0.25 * (g.hi[d] - g.lo[d]) + 0.5 * g.cell[d]) return false;
      }
    }
    return true;
  };
  auto plateau_ok = [&](int k) {
    // plateau half-extent at least 4 cells on every axis
    for (Index p : probes) {
      const auto members = section_members_node(g, p, dyadic(k));
      for (int d = 0; d < g.dim; ++d) {
        Scalar radius = 0;
        for (Index m : members)
          radius = std::max(radius, std::abs(g.nodes(m, d) - g.nodes(p, d)));
        if (radius < 4.0 * g.cell[d]) return false;
      }
    }
    return true;
  };

  int k_min = k_hi + 1, k_max = k_lo - 1;
  for (int k = k_lo; k <= k_hi; ++k) {
    if (k_min > k_hi && support_ok(k)) k_min = k;
    if (plateau_ok(k)) k_max = k;
  }
  if (k_min > k_max)
    throw ConfigError("no admissible dyadic scales at this resolution/domain combination");
  return {k_min, k_max};
}

std::pair<Scalar, Scalar> envelope_fit(const std::vector<Scalar>& logx,
                                       const std::vector<Scalar>& logy, int bins) {
  if (logx.size() < 8) return {0.0, 0.0};
  const auto [mn_it, mx_it] = std::minmax_element(logx.begin(), logx.end());
  const Scalar mn = *mn_it, mx = *mx_it;
  if (!(mx > mn)) return {0.0, 0.0};
  std::vector<Scalar> bx(bins), by(bins, -kInf);
  for (int b = 0; b < bins; ++b) bx[b] = mn + (mx - mn) * (b + 0.5) / bins;
  for (size_t i = 0; i < logx.size(); ++i) {
    int b = static_cast<int>((logx[i] - mn) / (mx - mn) * bins);
    b = std::clamp(b, 0, bins - 1);
    by[b] = std::max(by[b], logy[i]);
  }
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int b = 0; b < bins; ++b) {
    if (by[b] == -kInf) continue;
    sx += bx[b];
    sy += by[b];
    sxx += bx[b] * bx[b];
    sxy += bx[b] * by[b];
    ++m;
  }
  if (m < 3) return {0.0, 0.0};
  const Scalar den = m * sxx - sx * sx;
  if (den <= 0) return {0.0, 0.0};
  const Scalar slope = (m * sxy - sx * sy) / den;
  // tight upper-envelope constant for the fitted exponent
  Scalar c = -kInf;
  for (size_t i = 0; i < logx.size(); ++i) c = std::max(c, logy[i] - slope * logx[i]);
  return {slope, std::exp(c)};
}

namespace {

// Hoelder increment samples for one scale: data points
// (log 2^k rho_bar(x,x'), log |S_k(x,y)-S_k(x',y)| (V_k(x)+V_k(y))).
void holder_samples(const AIStack& st, int k, int count, std::uint64_t seed, bool swap_roles,
                    std::vector<Scalar>& logx, std::vector<Scalar>& logy) {
  const auto& g = *st.grid;
  const auto& S = st.S.at(k);
  const auto& V = st.V.at(k);
  const auto nodes = masked_nodes(st.mask.at(k));
  if (nodes.size() < 2) return;
  Rng rng(split_mix(seed ^ static_cast<std::uint64_t>(0x900d + k)));
  const Scalar scale = std::ldexp(1.0, k);
  for (int s = 0; s < count; ++s) {
    const Index x = nodes[rng.index(static_cast<Index>(nodes.size()))];
    // x' from the plateau section around x: pre-saturation separations
    const auto near = section_members_node(g, x, dyadic(k));
    if (near.size() < 2) continue;
    const Index xp = near[rng.index(static_cast<Index>(near.size()))];
    if (xp == x || !st.mask.at(k)[xp]) continue;
    const Scalar sep = scale * g.rb(x, xp);
    if (sep <= 0) continue;
    // y from the kernel support column of x
    std::vector<Index> ys;
    for (KernelMatrix::InnerIterator it(S, x); it; ++it) ys.push_back(it.row());
    if (ys.empty()) continue;
    for (int t = 0; t < 4; ++t) {
      const Index y = ys[rng.index(static_cast<Index>(ys.size()))];
      const Scalar sxy = swap_roles ? S.coeff(y, x) : S.coeff(x, y);
      const Scalar sxpy = swap_roles ? S.coeff(y, xp) : S.coeff(xp, y);
      const Scalar dv = std::abs(sxy - sxpy) * (V[x] + V[y]);
      if (dv <= 1e-300) continue;
      logx.push_back(std::log(sep));
      logy.push_back(std::log(dv));
    }
  }
}

}  // namespace

AIStack build_stack(const DiscretizedDomain& g, const ConvexPotential& pot, int k_min, int k_max,
                    const BumpProfile& profile, Scalar a0) {
  if (k_min > k_max) throw ConfigError("build_stack requires k_min <= k_max");
  AIStack st;
  st.grid = &g;
  st.pot = pot;
  st.profile = profile;
  st.k_min = k_min;
  st.k_max = k_max;
  st.a0 = a0 > 0 ? a0 : estimate_a0(g, 400, 0xa11ceull);

  for (int k = k_min - 1; k <= k_max; ++k) {
    TkData tk = assemble_Tk_data(g, k, profile);
    if (k >= k_min && masked_nodes(tk.mask).empty())
      throw NumericError("scale out of range: empty interior mask at k=" + std::to_string(k));
    st.S[k] = assemble_Sk_from(g, tk);
    st.T1[k] = std::move(tk.T1);
    st.V[k] = std::move(tk.V);
    st.mask[k] = std::move(tk.mask);
  }
  for (int k = k_min; k <= k_max; ++k) {
    KernelMatrix D = st.S.at(k) - st.S.at(k - 1);
    D.prune(0.0);
    D.makeCompressed();
    st.D[k] = std::move(D);
  }

  std::vector<Scalar> lx, ly;
  for (int k = k_min; k <= k_max; ++k) holder_samples(st, k, 300, 0xf17ull, false, lx, ly);
  const auto [slope, c] = envelope_fit(lx, ly);
  (void)c;
  st.eps_fit = std::clamp(slope, 0.05, 1.0);
  return st;
}

const AIPropertyRow* AIPropertyReport::find(const std::string& property, int k) const {
  for (const auto& r : rows)
    if (r.property == property && r.k == k) return &r;
  return nullptr;
}

AIPropertyReport verify_ai_properties(const AIStack& st, int samples, std::uint64_t seed) {
  const auto& g = *st.grid;
  AIPropertyReport rep;
  const GridFunction ones = GridFunction::Ones(g.size());

  for (int k = st.k_min; k <= st.k_max; ++k) {
    const auto& S = st.S.at(k);
    const auto& V = st.V.at(k);
    const auto& mask = st.mask.at(k);

    // (i) symmetry
    {
      KernelMatrix A = KernelMatrix(S.transpose()) - S;
      Scalar dev = 0;
      for (int c = 0; c < A.outerSize(); ++c)
        for (KernelMatrix::InnerIterator it(A, c); it; ++it) dev = std::max(dev, std::abs(it.value()));
      rep.rows.push_back({"symmetry", k, 0, 0, dev});
      rep.exact_violation = std::max(rep.exact_violation, dev);
    }

    // (ii) support: measured constant sup rho_bar / 2^{2-k} over nonzeros;
    // violation relative to the sampled quasi-triangle constant with 5%
    // headroom (the sampled a0 approaches the true one from below)
    {
      Scalar c_supp = 0;
      const Scalar scale = std::ldexp(1.0, k - 2);
      for (int c = 0; c < S.outerSize(); ++c)
        for (KernelMatrix::InnerIterator it(S, c); it; ++it)
          if (it.value() != 0) c_supp = std::max(c_supp, g.rb(it.row(), c) * scale);
      const Scalar viol = std::max(0.0, c_supp - 1.05 * st.a0);
      rep.rows.push_back({"support", k, c_supp, 0, viol});
      rep.exact_violation = std::max(rep.exact_violation, viol);
    }

    // (ii) size bound constant
    {
      Scalar cmax = 0;
      for (int c = 0; c < S.outerSize(); ++c) {
        if (!mask[c]) continue;
        for (KernelMatrix::InnerIterator it(S, c); it; ++it)
          if (mask[it.row()])
            cmax = std::max(cmax, std::abs(it.value()) * (V[it.row()] + V[c]));
      }
      rep.rows.push_back({"size", k, cmax, 0, 0});
    }

    // (iii)/(iv) Hoelder fits
    for (int variable = 0; variable < 2; ++variable) {
      std::vector<Scalar> lx, ly;
      holder_samples(st, k, samples, seed + variable, variable == 1, lx, ly);
      const auto [slope, cenv] = envelope_fit(lx, ly);
      rep.rows.push_back({variable == 0 ? "holder_x" : "holder_y", k, cenv, slope, 0});
    }

    // (v) second difference constant at the stack exponent
    {
      Rng rng(split_mix(seed ^ static_cast<std::uint64_t>(0x5ec0 + k)));
      const auto nodes = masked_nodes(mask);
      Scalar cmax = 0;
      const Scalar scale = std::ldexp(1.0, k);
      for (int s = 0; s < samples && nodes.size() >= 2; ++s) {
        const Index x = nodes[rng.index(static_cast<Index>(nodes.size()))];
        const auto nx = section_members_node(g, x, dyadic(k));
        if (nx.size() < 2) continue;
        const Index xp = nx[rng.index(static_cast<Index>(nx.size()))];
        if (xp == x || !mask[xp]) continue;
        std::vector<Index> ys;
        for (KernelMatrix::InnerIterator it(S, x); it; ++it)
          if (mask[it.row()]) ys.push_back(it.row());
        if (ys.size() < 2) continue;
        const Index y = ys[rng.index(static_cast<Index>(ys.size()))];
        const auto ny = section_members_node(g, y, dyadic(k));
        if (ny.size() < 2) continue;
        const Index yp = ny[rng.index(static_cast<Index>(ny.size()))];
        if (yp == y || !mask[yp]) continue;
        const Scalar du = scale * g.rb(x, xp), dv = scale * g.rb(y, yp);
        if (du <= 0 || dv <= 0) continue;
        const Scalar dd = std::abs((S.coeff(x, y) - S.coeff(xp, y)) - (S.coeff(x, yp) - S.coeff(xp, yp)));
        if (dd <= 1e-300) continue;
        cmax = std::max(cmax, dd * (V[x] + V[y]) /
                                  (std::pow(du, st.eps_fit) * std::pow(dv, st.eps_fit)));
      }
      rep.rows.push_back({"second_diff", k, cmax, st.eps_fit, 0});
    }

    // (vi)/(vii) normalization; exact discrete identities
    {
      const GridFunction rs = apply(S, g, ones);
      const GridFunction cs = KernelMatrix(S.transpose()) * g.weights;
      Scalar dr = 0, dc = 0;
      for (Index i = 0; i < g.size(); ++i) {
        dr = std::max(dr, std::abs(rs[i] - 1.0));
        dc = std::max(dc, std::abs(cs[i] - 1.0));
      }
      rep.rows.push_back({"normalization_row", k, 1, 0, dr});
      rep.rows.push_back({"normalization_col", k, 1, 0, dc});
      rep.exact_violation = std::max({rep.exact_violation, dr, dc});
    }

    if (st.D.count(k)) {
      const GridFunction dk1 = apply(st.D.at(k), g, ones);
      const Scalar dev = dk1.cwiseAbs().maxCoeff();
      rep.rows.push_back({"dk_annihilates_const", k, 0, 0, dev});
      rep.exact_violation = std::max(rep.exact_violation, dev);
    }
  }

  // pooled Hoelder exponent across scales and both variables
  {
    std::vector<Scalar> lx, ly;
    for (int k = st.k_min; k <= st.k_max; ++k) {
      holder_samples(st, k, samples, seed, false, lx, ly);
      holder_samples(st, k, samples, seed + 1, true, lx, ly);
    }
    const auto [slope, cenv] = envelope_fit(lx, ly);
    rep.holder_exponent = slope;
    rep.rows.push_back({"holder_pooled", 0, cenv, slope, 0});
  }
  return rep;
}

}  // namespace mabesov
