#pragma once

#include <map>

#include "mabesov/ai_stack.hpp"

namespace mabesov {

// Weighted compositions D_j o D_k for every ordered scale pair; shared by
// the orthogonality table and the T_N assembly.
struct PairProducts {
  std::map<std::pair<int, int>, KernelMatrix> P;
  const KernelMatrix& at(int j, int k) const { return P.at({j, k}); }
};

PairProducts compute_pair_products(const AIStack& st);

// ||D_j D_k||_{L^p -> L^p} for all scale pairs, with the decay fit
// log2(entry) ~ log2(C) - eps |j-k| over gaps >= 2. fitted_C is the tight
// upper envelope constant for the fitted exponent. The p = inf entries are
// the p = 1 entries of the transposed pair (transpose duality; the D_k are
// symmetric).
struct OperatorNormTable {
  Scalar p = 2;
  std::map<std::pair<int, int>, Scalar> entries;
  Scalar fitted_eps = 0;
  Scalar fitted_C = 0;

  Scalar at(int j, int k) const { return entries.at({j, k}); }
};

OperatorNormTable almost_orthogonality_table(const AIStack& st, Scalar p);
OperatorNormTable almost_orthogonality_table(const AIStack& st, Scalar p, const PairProducts& pp);

// Band projector E = S_{k_max} - S_{k_min - 1} (= sum of all D_k in range)
// and the band identity B = E o E, the finite-range surrogate for I.
KernelMatrix band_projector(const AIStack& st);
KernelMatrix band_identity(const AIStack& st);

// T_N = sum over |j-k| <= N of D_j D_k, scales clipped to the stack range.
// Any N >= 0 is accepted here; the contraction invariant N <= (k_max -
// k_min)/2 is enforced where the Neumann inverse is formed.
KernelMatrix assemble_TN(const AIStack& st, int N);
KernelMatrix assemble_TN(const AIStack& st, int N, const PairProducts& pp);

// Neumann partial sum sum_{m<=M} R^m f; stops when the increment norm drops
// below tol * ||f||_2. Throws NumericError when increment norms fail to
// decrease over five consecutive terms.
GridFunction neumann_apply(const KernelMatrix& R, const DiscretizedDomain& g, const GridFunction& f,
                           int max_terms, Scalar tol, int* terms_used = nullptr);

struct CalderonOperator {
  const AIStack* stack = nullptr;
  int N = 1;
  int neumann_terms = 100;
  Scalar residual_tol = 1e-9;
  KernelMatrix TN;
  KernelMatrix RN;        // band identity minus T_N
  Scalar rn_norm2 = 0;    // operator 2-norm of R_N

  CalderonOperator(const AIStack& st, int N, int neumann_terms = 100, Scalar residual_tol = 1e-9);
  CalderonOperator(const AIStack& st, int N, const PairProducts& pp, int neumann_terms = 100,
                   Scalar residual_tol = 1e-9);
};

// T_N^{-1} f via the Neumann series in R_N; requires rn_norm2 < 1.
GridFunction apply_TN_inverse(const CalderonOperator& op, const GridFunction& f,
                              int* terms_used = nullptr);

struct ReproduceResult {
  GridFunction reconstruction;
  Scalar residual = 0;       // ||B f - reconstruction||_2 / ||B f||_2
  int neumann_terms_used = 0;
};

// Calderon reproducing surrogate: reconstruction = sum_k T_N^{-1} D_k^N D_k f
// with D_k^N = sum_{|j|<=N} D_{k+j} clipped to the range; the residual is
// measured against the in-band projection B f with B the band identity.
ReproduceResult reproduce(const CalderonOperator& op, const GridFunction& f);

}  // namespace mabesov
