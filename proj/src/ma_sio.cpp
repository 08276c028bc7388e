#include "mabesov/ma_sio.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mabesov/rng.hpp"

namespace mabesov {

namespace {

Scalar pw2(int e) { return std::ldexp(1.0, e); }  // 2^e

std::vector<Index> masked_nodes(const Mask& m) {
  std::vector<Index> out;
  for (Index i = 0; i < static_cast<Index>(m.size()); ++i)
    if (m[i]) out.push_back(i);
  return out;
}

}  // namespace

SectionNormalizer normalize_section(const DiscretizedDomain& g, const ConvexPotential& pot,
                                    const Vector& x, Scalar t) {
  const auto members = section_members(g, pot, x, t);
  if (static_cast<int>(members.size()) < g.dim + 1)
    throw NumericError("normalize_section: section has too few grid nodes at this resolution");

  SectionNormalizer T;
  T.center = x;
  T.t = t;
  const Scalar n_inv = 1.0 / g.dim;

  if (g.dim == 1) {
    Scalar mn = kInf, mx = -kInf;
    for (Index m : members) {
      mn = std::min(mn, g.nodes(m, 0));
      mx = std::max(mx, g.nodes(m, 0));
    }
    T.A = Matrix::Constant(1, 1, 2.0 / (mx - mn));
    T.b = Vector::Constant(1, -(mx + mn) / (mx - mn));
  } else {
    Vector c = Vector::Zero(2);
    for (Index m : members) c += g.node(m);
    c /= static_cast<Scalar>(members.size());
    Matrix cov = Matrix::Zero(2, 2);
    for (Index m : members) {
      const Vector d = g.node(m) - c;
      cov += d * d.transpose();
    }
    cov /= static_cast<Scalar>(members.size());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (!(eig.eigenvalues().minCoeff() > 1e-12 * eig.eigenvalues().maxCoeff()))
      throw NumericError("normalize_section: degenerate section point set");
    const Matrix white =
        eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        eig.eigenvectors().transpose();
    Scalar rmax = 0;
    for (Index m : members) rmax = std::max(rmax, (white * (g.node(m) - c)).norm());
    Scalar dmin = kInf;
    {
      Mask is_member(g.size(), 0);
      for (Index m : members) is_member[m] = 1;
      for (Index z = 0; z < g.size(); ++z)
        if (!is_member[z]) dmin = std::min(dmin, (white * (g.node(z) - c)).norm());
    }
    // feasibility window for the scale: members inside B(0,1) needs s >= rmax,
    // non-members outside B(0,1/n) needs s <= n * dmin (half-cell slop)
    const Scalar slop = 0.75 * (white * g.cell).norm();
    if (rmax > 2.0 * (dmin + slop))
      throw NumericError("normalize_section: sandwich unsatisfiable after scaling search");
    T.A = white / rmax;
    T.b = -(white * c) / rmax;
  }

  // sandwich check on the grid
  {
    Mask is_member(g.size(), 0);
    for (Index m : members) is_member[m] = 1;
    const Scalar slop = 1.5 * (T.A * g.cell).norm();
    for (Index m : members)
      if (T(g.node(m)).norm() > 1.0 + 1e-9)
        throw NumericError("normalize_section: member escapes the unit ball");
    for (Index z = 0; z < g.size(); ++z)
      if (!is_member[z] && T(g.node(z)).norm() < n_inv - slop)
        throw NumericError("normalize_section: non-member inside the inner ball");
  }
  return T;
}

std::vector<int> random_signs(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> s(n);
  for (auto& v : s) v = rng.sign();
  return s;
}

namespace {

struct C2Fit {
  Scalar c2 = 0;
  Scalar gamma_eff = 0;
};

// (D6)/(D7) quotients with the affine normalization of the section S(y, 2^i):
// |k_i(u,y) - k_i(v,y)| mu(S(y,2^i)) / |T(u)-T(v)|^gamma. Also fits the
// effective exponent from the increment envelope.
C2Fit measure_c2(const MAKernelFamily& fam, int samples, std::uint64_t seed) {
  const AIStack& st = *fam.stack;
  const auto& g = *st.grid;
  Rng rng(seed);
  C2Fit out;
  std::vector<Scalar> lx, ly;
  for (const auto& [i, Ki] : fam.kernels) {
    const int k = -i;
    if (!st.mask.count(k)) continue;
    const auto nodes = masked_nodes(st.mask.at(k));
    if (nodes.empty()) continue;
    const Vector& Vk = st.V.at(k);
    const int per_i = std::max(2, samples / static_cast<int>(fam.kernels.size()));
    for (int s = 0; s < per_i; ++s) {
      const Index y = nodes[rng.index(static_cast<Index>(nodes.size()))];
      SectionNormalizer T;
      try {
        T = normalize_section(g, st.pot, g.node(y), pw2(i));
      } catch (const NumericError&) {
        continue;
      }
      std::vector<Index> supp;
      for (KernelMatrix::InnerIterator it(Ki, y); it; ++it) supp.push_back(it.row());
      if (supp.size() < 2) continue;
      for (int rep = 0; rep < 8; ++rep) {
        const Index u = supp[rng.index(static_cast<Index>(supp.size()))];
        const Index v = supp[rng.index(static_cast<Index>(supp.size()))];
        if (u == v) continue;
        const Scalar dist = T.image_distance(g.node(u), g.node(v));
        const Scalar dk = std::abs(Ki.coeff(u, y) - Ki.coeff(v, y)) * Vk[y];
        if (dist <= 0 || dk <= 1e-300) continue;
        out.c2 = std::max(out.c2, dk / std::pow(dist, fam.gamma));
        lx.push_back(std::log(dist));
        ly.push_back(std::log(dk));
      }
    }
  }
  const auto [slope, cenv] = envelope_fit(lx, ly);
  (void)cenv;
  out.gamma_eff = std::clamp(slope, 0.0, 1.0);
  return out;
}

Scalar family_c1(const MAKernelFamily& fam) {
  const auto& g = *fam.stack->grid;
  Scalar c1 = 0;
  for (const auto& [i, Ki] : fam.kernels)
    c1 = std::max({c1, op_norm(g, Ki, 1), op_norm(g, Ki, kInf)});
  return c1;
}

void check_i_range(const AIStack& st, int i_min, int i_max) {
  if (i_min > i_max) throw ConfigError("kernel family requires i_min <= i_max");
  if (-i_max < st.k_min || -i_min > st.k_max)
    throw ConfigError("kernel family index range outside the stack's negated scale range");
}

}  // namespace

MAKernelFamily build_canonical_family(const AIStack& st, const std::vector<int>& signs, int i_min,
                                      int i_max) {
  check_i_range(st, i_min, i_max);
  if (static_cast<int>(signs.size()) != i_max - i_min + 1)
    throw ConfigError("signs list must match the kernel index range");
  MAKernelFamily fam;
  fam.stack = &st;
  fam.signs = signs;
  fam.i_min = i_min;
  fam.i_max = i_max;
  fam.gamma = st.eps_fit;
  fam.support_const = 8.0 * st.a0;  // D_{-i} lives in S(., a0 2^{3+i})
  for (int i = i_min; i <= i_max; ++i) {
    KernelMatrix Ki = st.D.at(-i);
    if (signs[i - i_min] < 0) Ki *= -1.0;
    fam.kernels[i] = std::move(Ki);
  }
  fam.c1 = family_c1(fam);
  fam.c2 = measure_c2(fam, 32, 0xc2c2ull).c2;
  return fam;
}

MAKernelFamily build_two_bump_family(const AIStack& a, const AIStack& b, int i_min, int i_max) {
  if (a.grid != b.grid) throw ConfigError("two-bump family requires stacks on one grid");
  check_i_range(a, i_min, i_max);
  check_i_range(b, i_min, i_max);
  MAKernelFamily fam;
  fam.stack = &a;
  fam.signs.assign(i_max - i_min + 1, 1);
  fam.i_min = i_min;
  fam.i_max = i_max;
  fam.gamma = std::min(a.eps_fit, b.eps_fit);
  fam.support_const = 4.0 * std::max(a.a0, b.a0);
  for (int i = i_min; i <= i_max; ++i) {
    KernelMatrix Ki = a.S.at(-i) - b.S.at(-i);
    Ki.prune(0.0);
    fam.kernels[i] = std::move(Ki);
  }
  fam.c1 = family_c1(fam);
  fam.c2 = measure_c2(fam, 32, 0xc2c2ull).c2;
  return fam;
}

MAKernelFamily mean_shift_family(const MAKernelFamily& f, Scalar shift) {
  MAKernelFamily out = f;
  for (auto& [i, Ki] : out.kernels) {
    KernelMatrix shifted = Ki;
    for (int c = 0; c < shifted.outerSize(); ++c)
      for (KernelMatrix::InnerIterator it(shifted, c); it; ++it) it.valueRef() += shift;
    Ki = std::move(shifted);
  }
  return out;
}

const DConditionRow* DConditionReport::find(const std::string& condition, int i) const {
  for (const auto& r : rows)
    if (r.condition == condition && r.i == i) return &r;
  return nullptr;
}

Scalar fit_eps1(const AIStack& st, int samples, std::uint64_t seed) {
  const auto& g = *st.grid;
  Rng rng(seed);
  std::vector<Scalar> lx, ly;
  // base sections at the coarse end so the shrunk ones stay resolved
  const int k0 = st.k_min;
  const auto nodes = masked_nodes(st.mask.at(k0));
  if (nodes.empty()) throw NumericError("fit_eps1: empty interior mask");
  const Scalar t0 = pw2(-k0);
  for (int s = 0; s < samples; ++s) {
    const Index x0 = nodes[rng.index(static_cast<Index>(nodes.size()))];
    SectionNormalizer T;
    try {
      T = normalize_section(g, st.pot, g.node(x0), t0);
    } catch (const NumericError&) {
      continue;
    }
    const auto inner_members = section_members_node(g, x0, 0.5 * t0);
    if (inner_members.empty()) continue;
    const Index y = inner_members[rng.index(static_cast<Index>(inner_members.size()))];
    for (int m = 1; m <= 4; ++m) {
      const Scalar t = t0 * pw2(-m);
      const auto members = section_members_node(g, y, t);
      if (members.size() < 5) continue;
      Scalar radius = 0;
      const Vector Ty = T(g.node(y));
      for (Index z : members) radius = std::max(radius, (T(g.node(z)) - Ty).norm());
      if (radius <= 0) continue;
      lx.push_back(std::log(t / t0));
      ly.push_back(std::log(radius));
    }
  }
  const auto [slope, c] = envelope_fit(lx, ly);
  (void)c;
  if (!(slope > 0)) throw NumericError("fit_eps1: no usable section samples");
  return std::min(slope, 1.0);
}

DConditionReport verify_D_conditions(const MAKernelFamily& fam, int samples, std::uint64_t seed) {
  const AIStack& st = *fam.stack;
  const auto& g = *st.grid;
  DConditionReport rep;
  const GridFunction ones = GridFunction::Ones(g.size());

  for (const auto& [i, Ki] : fam.kernels) {
    // (D1)/(D2) support inside S(., support_const 2^i); measured constant and
    // violation with the same 5% headroom used for the stack support check
    {
      Scalar c_supp = 0;
      for (int c = 0; c < Ki.outerSize(); ++c)
        for (KernelMatrix::InnerIterator it(Ki, c); it; ++it)
          if (it.value() != 0) c_supp = std::max(c_supp, g.rb(it.row(), c) / pw2(i));
      const Scalar viol = std::max(0.0, c_supp - 1.05 * fam.support_const);
      rep.rows.push_back({"D1_D2_support", i, c_supp, viol});
      rep.support_violation = std::max(rep.support_violation, viol);
    }
    // (D3) cancellation in both variables
    {
      const GridFunction row = apply(Ki, g, ones);
      const GridFunction col = KernelMatrix(Ki.transpose()) * g.weights;
      const Scalar dev = std::max(row.cwiseAbs().maxCoeff(), col.cwiseAbs().maxCoeff());
      rep.rows.push_back({"D3_cancellation", i, 0, dev});
      rep.d3_violation = std::max(rep.d3_violation, dev);
    }
    // (D4)/(D5) integrability
    {
      const Scalar c4 = op_norm(g, Ki, kInf);
      const Scalar c5 = op_norm(g, Ki, 1);
      rep.rows.push_back({"D4_row_integral", i, c4, 0});
      rep.rows.push_back({"D5_col_integral", i, c5, 0});
      rep.c1 = std::max({rep.c1, c4, c5});
    }
  }

  const C2Fit c2 = measure_c2(fam, samples, split_mix(seed ^ 0xd6d7ull));
  rep.c2 = c2.c2;
  rep.gamma_eff = c2.gamma_eff;
  rep.rows.push_back({"D6_D7_holder", 0, rep.c2, 0});
  rep.rows.push_back({"D6_D7_gamma_eff", 0, rep.gamma_eff, 0});

  rep.eps1_fit = fit_eps1(st, std::max(8, samples / 4), split_mix(seed ^ 0xe1ull));
  rep.rows.push_back({"A_eps1_proxy", 0, rep.eps1_fit, 0});

  rep.pass = rep.d3_violation <= 1e-8 && rep.support_violation <= 1e-8 &&
             std::isfinite(rep.c1) && std::isfinite(rep.c2) && rep.c1 > 0 &&
             rep.gamma_eff > 0 && rep.eps1_fit > 0;
  return rep;
}

KernelMatrix assemble_H(const MAKernelFamily& fam) {
  KernelMatrix H(fam.stack->grid->size(), fam.stack->grid->size());
  for (const auto& [i, Ki] : fam.kernels) H += Ki;
  H.prune(0.0);
  H.makeCompressed();
  return H;
}

GridFunction apply_H(const MAKernelFamily& fam, const GridFunction& f) {
  const auto& g = *fam.stack->grid;
  GridFunction out = GridFunction::Zero(g.size());
  for (const auto& [i, Ki] : fam.kernels) out += apply(Ki, g, f);
  return out;
}

Scalar l2_bound_experiment(const MAKernelFamily& fam, int ensemble, std::uint64_t seed,
                           Scalar* op_norm2_out) {
  const auto& g = *fam.stack->grid;
  const KernelMatrix H = assemble_H(fam);
  if (op_norm2_out) *op_norm2_out = op_norm(g, H, 2);
  Scalar worst = 0;
  for (int s = 0; s < ensemble; ++s) {
    const GridFunction f = random_in_band(*fam.stack, split_mix(seed + s));
    const Scalar nf = lp_norm(g, f, 2);
    if (nf <= 0) continue;
    worst = std::max(worst, lp_norm(g, apply(H, g, f), 2) / nf);
  }
  return worst;
}

Scalar besov_bound_experiment(const MAKernelFamily& fam, const AIStack& st, const BesovParams& bp,
                              int ensemble, std::uint64_t seed, Scalar eps1) {
  const Scalar limit = std::min(st.eps_fit, fam.gamma * eps1) / 4.0;
  if (!(std::abs(bp.alpha) < limit))
    throw ConfigError("alpha inadmissible for the singular integral bound: |alpha| < " +
                      std::to_string(limit) + " required (measured eps, gamma, eps1)");
  check_admissible(st, bp);
  Scalar worst = 0;
  for (int s = 0; s < ensemble; ++s) {
    const GridFunction f = random_in_band(st, split_mix(seed + 7919 * s));
    const Scalar nf = besov_norm(st, f, bp);
    if (nf <= 0) continue;
    worst = std::max(worst, besov_norm(st, apply_H(fam, f), bp) / nf);
  }
  return worst;
}

PointwiseAOReport pointwise_ao_check(const MAKernelFamily& fam, int samples, std::uint64_t seed) {
  const AIStack& st = *fam.stack;
  const auto& g = *st.grid;
  if (st.k_max - st.k_min + 1 < 3) throw NumericError("pointwise_ao_check needs >= 3 scales");
  PointwiseAOReport rep;
  const KernelMatrix H = assemble_H(fam);

  // D^# index window: D_m^# = D_{-m}
  const int m_lo = -st.k_max, m_hi = -st.k_min;
  Rng rng(seed);

  std::vector<Scalar> tail_lx, tail_ly;
  Scalar diag_max = 0, off_max = 0;
  std::vector<Scalar> gap_x, gap_y;

  for (int k = m_lo; k <= m_hi; ++k) {
    for (int kp = m_lo; kp <= m_hi; ++kp) {
      const KernelMatrix P = wprod(wprod(st.D.at(-k), H, g), st.D.at(-kp), g);
      const int s = std::max(k, kp);
      const Vector& Vs = st.V.at(-s);
      Scalar pair_max = 0;
      Index seen = 0;
      const Index cap = samples > 0 ? samples : 4000;
      // deterministic stride subsample over nonzeros
      const Index nnz = P.nonZeros();
      const Index stride = std::max<Index>(1, nnz / cap);
      Index idx = 0;
      for (int c = 0; c < P.outerSize(); ++c) {
        for (KernelMatrix::InnerIterator it(P, c); it; ++it, ++idx) {
          if (idx % stride != 0) continue;
          const Index a = it.row(), b = c;
          const Scalar rb = g.rb(a, b);
          const Scalar mu_ab = rb > 0 ? section_measure_node(g, a, rb) : 0.0;
          const Scalar den = Vs[a] + Vs[b] + mu_ab;
          if (den <= 0) continue;
          const Scalar nv = std::abs(it.value()) * den;
          pair_max = std::max(pair_max, nv);
          if (k == kp && nv > 1e-300 && rb > 0) {
            tail_lx.push_back(std::log(pw2(s) / (pw2(s) + rb)));
            tail_ly.push_back(std::log(nv));
          }
          ++seen;
        }
      }
      (void)seen;
      rep.pairs.push_back({k, kp, pair_max});
      if (k == kp)
        diag_max = std::max(diag_max, pair_max);
      else
        off_max = std::max(off_max, pair_max);
      if (pair_max > 0) {
        gap_x.push_back(std::abs(k - kp));
        gap_y.push_back(std::log2(pair_max));
      }
    }
  }

  // decay of the per-pair maxima in |k - k'|
  {
    Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(gap_x.size());
    for (int i = 0; i < m; ++i) {
      sx += gap_x[i];
      sy += gap_y[i];
      sxx += gap_x[i] * gap_x[i];
      sxy += gap_x[i] * gap_y[i];
    }
    if (m >= 3 && m * sxx - sx * sx > 0)
      rep.gap_exponent = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  {
    const auto [slope, c] = envelope_fit(tail_lx, tail_ly);
    (void)c;
    rep.tail_exponent = slope;
  }
  rep.diagonal_dominates = diag_max >= off_max;

  // six orderings of (k, k', j) from the proof, each fitted against its
  // predicted exponent combination
  {
    const Scalar eps = st.eps_fit;
    const Scalar cap_exp = std::min(eps, fam.gamma * std::max(fit_eps1(st, 8, seed ^ 0xca5eull), 0.05));
    const Scalar epsp = 0.5 * cap_exp;
    const Scalar epspp = 0.5 * (cap_exp + epsp);
    struct CaseDef {
      const char* name;
      std::function<bool(int, int, int)> match;
      std::function<Scalar(int, int, int)> predicted;
    };
    const std::vector<CaseDef> defs = {
        {"j<=k<k'", [](int j, int k, int kp) { return j <= k && k < kp; },
         [=](int j, int k, int kp) { return (std::abs(j - k) + std::abs(k - kp)) * eps; }},
        {"j<k'<=k", [](int j, int k, int kp) { return j < kp && kp <= k; },
         [=](int j, int k, int kp) { return (std::abs(j - kp) + std::abs(kp - k)) * eps; }},
        {"k'<=k<j", [](int j, int k, int kp) { return kp <= k && k < j; },
         [=](int j, int k, int kp) { return (std::abs(j - k) + std::abs(k - kp)) * epspp; }},
        {"k<k'<=j", [](int j, int k, int kp) { return k < kp && kp <= j; },
         [=](int j, int k, int kp) { return (std::abs(j - kp) + std::abs(kp - k)) * epspp; }},
        {"k<=j<=k'", [](int j, int k, int kp) { return k <= j && j <= kp; },
         [=](int j, int k, int kp) { return std::abs(j - k) * epsp + std::abs(j - kp) * eps; }},
        {"k'<j<k", [](int j, int k, int kp) { return kp < j && j < k; },
         [=](int j, int k, int kp) { return std::abs(j - kp) * epsp + std::abs(j - k) * eps; }},
    };
    std::map<std::pair<int, int>, KernelMatrix> left;  // D_k# o H_j cache
    for (const auto& def : defs) {
      std::vector<Scalar> ex, ny;
      for (int k = m_lo; k <= m_hi && ex.size() < 40; ++k)
        for (int kp = m_lo; kp <= m_hi && ex.size() < 40; ++kp)
          for (int j = std::max(m_lo, fam.i_min); j <= std::min(m_hi, fam.i_max); ++j) {
            if (!def.match(j, k, kp)) continue;
            if (ex.size() >= 40) break;
            auto it = left.find({k, j});
            if (it == left.end())
              it = left.emplace(std::make_pair(k, j), wprod(st.D.at(-k), fam.kernels.at(j), g)).first;
            const KernelMatrix T3 = wprod(it->second, st.D.at(-kp), g);
            const Scalar nrm = op_norm(g, T3, 1);
            if (nrm <= 1e-300) continue;
            ex.push_back(def.predicted(j, k, kp));
            ny.push_back(std::log2(nrm));
          }
      Scalar slope = 0;
      const int m = static_cast<int>(ex.size());
      if (m >= 3) {
        Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < m; ++i) {
          sx += ex[i];
          sy += ny[i];
          sxx += ex[i] * ex[i];
          sxy += ex[i] * ny[i];
        }
        if (m * sxx - sx * sx > 0) slope = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
      }
      rep.cases.push_back({def.name, m, slope});
    }
  }
  return rep;
}

}  // namespace mabesov
