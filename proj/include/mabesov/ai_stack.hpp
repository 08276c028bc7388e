#pragma once

#include <map>
#include <vector>

#include "mabesov/bump.hpp"
#include "mabesov/sections.hpp"
#include "mabesov/weighted_ops.hpp"

namespace mabesov {

// Approximation to the identity over a dyadic scale range, as weighted
// kernel matrices. S_k is the Coifman composition diag(M) T diag(wW) T
// diag(M) built from the discrete T_k, so the discrete row/column
// normalization is exact by construction. D_k = S_k - S_{k-1}.
struct AIStack {
  const DiscretizedDomain* grid = nullptr;
  ConvexPotential pot;
  BumpProfile profile;
  int k_min = 0, k_max = 0;  // D_k available for k_min..k_max, S_k for k_min-1..k_max
  Scalar a0 = 0;             // quasi-triangle constant used for supports/masks
  Scalar eps_fit = 0;        // measured kernel Hoelder exponent, in (0,1]

  std::map<int, KernelMatrix> S;
  std::map<int, KernelMatrix> D;
  std::map<int, Vector> T1;        // discrete T_k(1)
  std::map<int, Vector> V;         // V_k(x_i) = mu(S(x_i, 2^-k))
  std::map<int, Mask> mask;        // interior nodes per scale

  std::vector<int> scales() const {
    std::vector<int> ks;
    for (int k = k_min; k <= k_max; ++k) ks.push_back(k);
    return ks;
  }
  Index mask_count(int k) const;
};

// Kernel matrix of T_k: entries bump(2^k rho_bar(x_i, x_j)). Also returns,
// when requested, V_k accumulated in the same pass.
KernelMatrix assemble_Tk(const DiscretizedDomain& g, const ConvexPotential& pot, int k,
                         const BumpProfile& profile = {}, Vector* Vk = nullptr);

// Coifman kernel S_k = diag(M) T diag(w W) T diag(M) with M = 1/T_k(1) and
// W = 1/T_k(M), both taken from the discrete T_k. Symmetric; rows and
// columns mu-integrate to 1.
KernelMatrix assemble_Sk(const DiscretizedDomain& g, const ConvexPotential& pot, int k,
                         const BumpProfile& profile = {});

// Largest k whose plateau still covers >= 4 grid cells, and smallest k whose
// kernel support stays within a quarter of the domain width with a nonempty
// interior mask.
std::pair<int, int> admissible_scale_range(const DiscretizedDomain& g, const ConvexPotential& pot,
                                           Scalar a0 = 0);

// Builds S_{k_min-1}..S_{k_max}, D_{k_min}..D_{k_max}, per-scale interior
// masks and V_k, and fits the stack regularity exponent. a0 = 0 estimates the
// quasi-triangle constant internally with a fixed seed.
AIStack build_stack(const DiscretizedDomain& g, const ConvexPotential& pot, int k_min, int k_max,
                    const BumpProfile& profile = {}, Scalar a0 = 0);

struct AIPropertyRow {
  std::string property;
  int k = 0;
  Scalar constant = 0;
  Scalar exponent = 0;
  Scalar max_violation = 0;
};

struct AIPropertyReport {
  std::vector<AIPropertyRow> rows;
  // worst violation among the machine-precision identities: symmetry,
  // row/col normalization, D_k(1) = 0, support beyond a0 2^{2-k}
  Scalar exact_violation = 0;
  Scalar holder_exponent = 0;  // fitted over both variables

  const AIPropertyRow* find(const std::string& property, int k) const;
};

// Measures the constants of the kernel estimates per scale: size, Hoelder in
// each variable (log-log envelope fit), second difference, normalization and
// cancellation deviations.
AIPropertyReport verify_ai_properties(const AIStack& st, int samples, std::uint64_t seed);

// Upper-envelope log-log fit helper: bins x, fits a line through per-bin
// maxima of y. Returns {slope, intercept_constant} with y ~ C * x^slope.
std::pair<Scalar, Scalar> envelope_fit(const std::vector<Scalar>& logx,
                                       const std::vector<Scalar>& logy, int bins = 24);

}  // namespace mabesov
