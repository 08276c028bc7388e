#include "mabesov/besov.hpp"

#include <cmath>
#include <sstream>

#include "mabesov/rng.hpp"

namespace mabesov {

Scalar conjugate_exponent(Scalar p) {
  if (p < 1) throw std::invalid_argument("exponent must satisfy p >= 1");
  if (p == 1) return kInf;
  if (p == kInf) return 1;
  return p / (p - 1);
}

void check_admissible(const AIStack& st, const BesovParams& bp) {
  if (bp.p < 1 || bp.q < 1) throw std::invalid_argument("Besov exponents require p,q >= 1");
  if (!(std::abs(bp.alpha) < st.eps_fit / 4)) {
    std::ostringstream msg;
    msg << "alpha = " << bp.alpha << " is inadmissible: the stack's measured regularity is eps = "
        << st.eps_fit << ", so |alpha| < " << st.eps_fit / 4 << " is required";
    throw ConfigError(msg.str());
  }
}

Scalar lq_over_scales(const std::map<int, Scalar>& block_norms, Scalar alpha, Scalar q) {
  if (q == kInf) {
    Scalar s = 0;
    for (const auto& [k, b] : block_norms) s = std::max(s, std::pow(2.0, k * alpha) * b);
    return s;
  }
  if (q == 1) {
    Scalar s = 0;
    for (const auto& [k, b] : block_norms) s += std::pow(2.0, k * alpha) * b;
    return s;
  }
  if (q == 2) {
    Scalar s = 0;
    for (const auto& [k, b] : block_norms) {
      const Scalar t = std::pow(2.0, k * alpha) * b;
      s += t * t;
    }
    return std::sqrt(s);
  }
  Scalar s = 0;
  for (const auto& [k, b] : block_norms) s += std::pow(std::pow(2.0, k * alpha) * b, q);
  return std::pow(s, 1.0 / q);
}

LPDecomposition lp_decompose(const AIStack& st, const GridFunction& f, const BesovParams& bp) {
  check_admissible(st, bp);
  LPDecomposition out;
  out.params = bp;
  for (int k = st.k_min; k <= st.k_max; ++k) {
    out.blocks[k] = apply(st.D.at(k), *st.grid, f);
    out.block_norms[k] = lp_norm(*st.grid, out.blocks[k], bp.p);
  }
  out.norm = lq_over_scales(out.block_norms, bp.alpha, bp.q);
  return out;
}

Scalar besov_norm(const AIStack& st, const GridFunction& f, const BesovParams& bp) {
  check_admissible(st, bp);
  std::map<int, Scalar> bn;
  for (int k = st.k_min; k <= st.k_max; ++k)
    bn[k] = lp_norm(*st.grid, apply(st.D.at(k), *st.grid, f), bp.p);
  return lq_over_scales(bn, bp.alpha, bp.q);
}

GridFunction random_in_band(const AIStack& st, std::uint64_t seed) {
  const auto& g = *st.grid;
  GridFunction f = GridFunction::Zero(g.size());
  for (int k = st.k_min; k <= st.k_max; ++k) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(k + 1024));
    GridFunction w(g.size());
    for (Index i = 0; i < g.size(); ++i) w[i] = rng.normal();
    f += apply(st.D.at(k), g, w);
  }
  return f;
}

ColumnNormReport column_norm_check(const AIStack& st, const BesovParams& bp, int samples,
                                   std::uint64_t seed) {
  check_admissible(st, bp);
  const auto& g = *st.grid;
  ColumnNormReport rep;
  Rng rng(seed);
  for (int k = st.k_min; k <= st.k_max; ++k) {
    const auto& mask = st.mask.at(k);
    std::vector<Index> nodes;
    for (Index i = 0; i < g.size(); ++i)
      if (mask[i]) nodes.push_back(i);
    if (nodes.empty()) continue;
    const int per_scale = std::max(1, samples / (st.k_max - st.k_min + 1));
    for (int s = 0; s < per_scale; ++s) {
      const Index x = nodes[rng.index(static_cast<Index>(nodes.size()))];
      // column D_k(x, .) as a grid function
      GridFunction col = GridFunction::Zero(g.size());
      for (KernelMatrix::InnerIterator it(st.D.at(k), x); it; ++it) col[it.row()] = it.value();
      const Scalar nrm = besov_norm(st, col, bp);
      const Scalar vk = st.V.at(k)[x];
      const Scalar bound = std::pow(2.0, k * bp.alpha) *
                           (bp.p == kInf ? 1.0 / vk : std::pow(vk, 1.0 / bp.p - 1.0));
      if (!(bound > 0)) continue;
      rep.rows.push_back({k, x, nrm / bound});
      rep.max_ratio = std::max(rep.max_ratio, nrm / bound);
    }
  }
  return rep;
}

std::pair<Scalar, Scalar> norm_equivalence(const AIStack& a, const AIStack& b,
                                           const GridFunction& f, const BesovParams& bp) {
  if (a.grid != b.grid) throw ConfigError("norm_equivalence requires stacks on the same grid");
  const Scalar na = besov_norm(a, f, bp);
  const Scalar nb = besov_norm(b, f, bp);
  if (na <= 0 || nb <= 0) throw NumericError("norm_equivalence: degenerate norm");
  return {na / nb, nb / na};
}

EquivalenceReport norm_equivalence_ensemble(const AIStack& a, const AIStack& b,
                                            const BesovParams& bp, int ensemble,
                                            std::uint64_t seed) {
  EquivalenceReport rep;
  for (int s = 0; s < ensemble; ++s) {
    const GridFunction f = random_in_band(a, split_mix(seed + s));
    const auto [ab, ba] = norm_equivalence(a, b, f, bp);
    rep.rows.push_back({s, ab, ba});
    rep.max_ab = std::max(rep.max_ab, ab);
    rep.max_ba = std::max(rep.max_ba, ba);
  }
  return rep;
}

Scalar duality_pairing_check(const AIStack& st, const BesovParams& bp, int ensemble,
                             std::uint64_t seed) {
  check_admissible(st, bp);
  const auto& g = *st.grid;
  const BesovParams dual{-bp.alpha, conjugate_exponent(bp.p), conjugate_exponent(bp.q)};
  Scalar worst = 0;
  for (int s = 0; s < ensemble; ++s) {
    const GridFunction f = random_in_band(st, split_mix(seed ^ (2 * s + 1)));
    const GridFunction h = random_in_band(st, split_mix(seed ^ (2 * s + 2)));
    const Scalar den = besov_norm(st, f, bp) * besov_norm(st, h, dual);
    if (den <= 0) continue;
    worst = std::max(worst, std::abs(inner(g, f, h)) / den);
  }
  return worst;
}

SynthesisResult lp_synthesis(const AIStack& st, const std::map<int, GridFunction>& gk,
                             const BesovParams& bp) {
  check_admissible(st, bp);
  const auto& g = *st.grid;
  SynthesisResult out;
  out.g = GridFunction::Zero(g.size());
  std::map<int, Scalar> bn;
  bool any = false;
  for (const auto& [k, gkf] : gk) {
    if (k < st.k_min || k > st.k_max) throw ConfigError("lp_synthesis: scale outside stack range");
    out.g += apply(st.D.at(k), g, gkf);
    bn[k] = lp_norm(g, gkf, bp.p);
    if (bn[k] > 0) any = true;
  }
  if (!any) throw NumericError("lp_synthesis: all g_k vanish");
  const Scalar den = lq_over_scales(bn, bp.alpha, bp.q);
  out.norm_bound_ratio = besov_norm(st, out.g, bp) / den;
  return out;
}

}  // namespace mabesov
