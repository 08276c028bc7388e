#include "mabesov/calderon.hpp"

#include <cmath>

namespace mabesov {

PairProducts compute_pair_products(const AIStack& st) {
  PairProducts pp;
  for (int j = st.k_min; j <= st.k_max; ++j)
    for (int k = st.k_min; k <= st.k_max; ++k)
      pp.P[{j, k}] = wprod(st.D.at(j), st.D.at(k), *st.grid);
  return pp;
}

OperatorNormTable almost_orthogonality_table(const AIStack& st, Scalar p) {
  return almost_orthogonality_table(st, p, compute_pair_products(st));
}

OperatorNormTable almost_orthogonality_table(const AIStack& st, Scalar p,
                                             const PairProducts& pp) {
  if (st.k_max - st.k_min + 1 < 4)
    throw NumericError("almost_orthogonality_table needs at least 4 scales");
  OperatorNormTable tab;
  tab.p = p;
  for (int j = st.k_min; j <= st.k_max; ++j) {
    for (int k = st.k_min; k <= st.k_max; ++k) {
      // transpose duality: ||A||_{inf->inf} = ||A^T||_{1->1} and
      // (D_j D_k)^T = D_k D_j for symmetric blocks
      const Scalar v = (p == kInf) ? op_norm(*st.grid, pp.at(k, j), 1)
                                   : op_norm(*st.grid, pp.at(j, k), p);
      tab.entries[{j, k}] = v;
    }
  }
  // decay fit over gaps >= 2
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& [jk, v] : tab.entries) {
    const int gap = std::abs(jk.first - jk.second);
    if (gap < 2 || v <= 0) continue;
    const Scalar x = gap, y = std::log2(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 3 && m * sxx - sx * sx > 0) tab.fitted_eps = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  Scalar logc = -kInf;
  for (const auto& [jk, v] : tab.entries) {
    if (v <= 0) continue;
    logc = std::max(logc, std::log2(v) + tab.fitted_eps * std::abs(jk.first - jk.second));
  }
  tab.fitted_C = std::exp2(logc);
  return tab;
}

KernelMatrix band_projector(const AIStack& st) {
  KernelMatrix E = st.S.at(st.k_max) - st.S.at(st.k_min - 1);
  E.prune(0.0);
  return E;
}

KernelMatrix band_identity(const AIStack& st) {
  const KernelMatrix E = band_projector(st);
  return wprod(E, E, *st.grid);
}

KernelMatrix assemble_TN(const AIStack& st, int N) {
  return assemble_TN(st, N, compute_pair_products(st));
}

KernelMatrix assemble_TN(const AIStack& st, int N, const PairProducts& pp) {
  if (N < 0) throw std::invalid_argument("assemble_TN requires N >= 0");
  KernelMatrix T(st.grid->size(), st.grid->size());
  for (int j = st.k_min; j <= st.k_max; ++j)
    for (int k = st.k_min; k <= st.k_max; ++k)
      if (std::abs(j - k) <= N) T += pp.at(j, k);
  T.prune(0.0);
  T.makeCompressed();
  return T;
}

GridFunction neumann_apply(const KernelMatrix& R, const DiscretizedDomain& g, const GridFunction& f,
                           int max_terms, Scalar tol, int* terms_used) {
  GridFunction sum = f;
  GridFunction term = f;
  const Scalar f2 = lp_norm(g, f, 2);
  Scalar prev = kInf;
  int rising = 0;
  int used = 0;
  for (int m = 1; m <= max_terms; ++m) {
    term = apply(R, g, term);
    sum += term;
    used = m;
    const Scalar inc = lp_norm(g, term, 2);
    if (inc >= prev) {
      if (++rising >= 5) throw NumericError("Neumann series diverging: N too small");
    } else {
      rising = 0;
    }
    prev = inc;
    if (inc <= tol * f2) break;
  }
  if (terms_used) *terms_used = used;
  return sum;
}

CalderonOperator::CalderonOperator(const AIStack& st, int N_, int neumann_terms_,
                                   Scalar residual_tol_)
    : CalderonOperator(st, N_, compute_pair_products(st), neumann_terms_, residual_tol_) {}

CalderonOperator::CalderonOperator(const AIStack& st, int N_, const PairProducts& pp,
                                   int neumann_terms_, Scalar residual_tol_)
    : stack(&st), N(N_), neumann_terms(neumann_terms_), residual_tol(residual_tol_) {
  if (N < 1 || 2 * N > st.k_max - st.k_min)
    throw ConfigError("CalderonOperator requires 1 <= N <= (k_max - k_min)/2");
  TN = assemble_TN(st, N, pp);
  RN = band_identity(st) - TN;
  RN.prune(0.0);
  rn_norm2 = op_norm(*st.grid, RN, 2);
}

GridFunction apply_TN_inverse(const CalderonOperator& op, const GridFunction& f, int* terms_used) {
  if (!(op.rn_norm2 < 1.0))
    throw NumericError("R_N is not a contraction (||R_N||_2 = " + std::to_string(op.rn_norm2) +
                       "); increase N");
  return neumann_apply(op.RN, *op.stack->grid, f, op.neumann_terms, op.residual_tol, terms_used);
}

ReproduceResult reproduce(const CalderonOperator& op, const GridFunction& f) {
  const AIStack& st = *op.stack;
  const auto& g = *st.grid;
  // Reference is the band identity applied, (S_kmax - S_{kmin-1})^2 f: the
  // exact finite-range surrogate for f, so the residual measures only the
  // Neumann remainder and decays with N.
  const GridFunction f_band = apply(op.RN + op.TN, g, f);
  const Scalar nb = lp_norm(g, f_band, 2);
  if (nb <= 0) throw NumericError("reproduce: input has no in-band component");

  GridFunction s = GridFunction::Zero(g.size());
  for (int k = st.k_min; k <= st.k_max; ++k) {
    const GridFunction u = apply(st.D.at(k), g, f);
    for (int j = -op.N; j <= op.N; ++j) {
      const int kk = k + j;
      if (kk < st.k_min || kk > st.k_max) continue;
      s += apply(st.D.at(kk), g, u);
    }
  }
  ReproduceResult out;
  out.reconstruction = apply_TN_inverse(op, s, &out.neumann_terms_used);
  out.residual = lp_norm(g, f_band - out.reconstruction, 2) / nb;
  return out;
}

}  // namespace mabesov
