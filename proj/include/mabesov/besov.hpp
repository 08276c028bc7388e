#pragma once

#include <map>

#include "mabesov/calderon.hpp"

namespace mabesov {

struct BesovParams {
  Scalar alpha = 0;
  Scalar p = 2;  // 1 <= p <= inf
  Scalar q = 2;  // 1 <= q <= inf
};

Scalar conjugate_exponent(Scalar p);

// Admissibility gate |alpha| < eps_fit / 4 of the stack in use; throws
// ConfigError citing the measured exponent.
void check_admissible(const AIStack& st, const BesovParams& bp);

// Per-scale blocks D_k f with the (alpha,p,q) norm attached.
struct LPDecomposition {
  std::map<int, GridFunction> blocks;
  std::map<int, Scalar> block_norms;  // lp_norm(D_k f, p)
  BesovParams params;
  Scalar norm = 0;
};

LPDecomposition lp_decompose(const AIStack& st, const GridFunction& f, const BesovParams& bp);

// l^q over the scale range of 2^{k alpha} ||D_k f||_{L^p_mu}; q = inf is the
// sup over scales.
Scalar besov_norm(const AIStack& st, const GridFunction& f, const BesovParams& bp);

// l^q norm of the weighted block sequence {2^{k alpha} b_k}.
Scalar lq_over_scales(const std::map<int, Scalar>& block_norms, Scalar alpha, Scalar q);

// In-band test function sum_k D_k(noise_k) with per-scale noise streams.
GridFunction random_in_band(const AIStack& st, std::uint64_t seed);

struct ColumnNormRow {
  int k = 0;
  Index node = 0;
  Scalar ratio = 0;  // besov_norm(D_k(x,.)) / (2^{k alpha} V_k(x)^{1/p-1})
};

struct ColumnNormReport {
  std::vector<ColumnNormRow> rows;
  Scalar max_ratio = 0;
};

// Lemma-style column bound: the kernel columns D_k(x,.) are test functions
// with norm controlled by 2^{k alpha} V_k(x)^{1/p-1}.
ColumnNormReport column_norm_check(const AIStack& st, const BesovParams& bp, int samples,
                                   std::uint64_t seed);

// Norm ratio pair for one f under two approximation-to-identity stacks on
// the same grid.
std::pair<Scalar, Scalar> norm_equivalence(const AIStack& a, const AIStack& b,
                                           const GridFunction& f, const BesovParams& bp);

struct EquivalenceReport {
  struct Row {
    int sample = 0;
    Scalar ratio_ab = 0, ratio_ba = 0;
  };
  std::vector<Row> rows;
  Scalar max_ab = 0, max_ba = 0;
};

EquivalenceReport norm_equivalence_ensemble(const AIStack& a, const AIStack& b,
                                            const BesovParams& bp, int ensemble,
                                            std::uint64_t seed);

// Empirical duality constant: max over random in-band pairs of
// |<f,g>_mu| / (||f||_{alpha,p,q} ||g||_{-alpha,p',q'}).
Scalar duality_pairing_check(const AIStack& st, const BesovParams& bp, int ensemble,
                             std::uint64_t seed);

struct SynthesisResult {
  GridFunction g;
  Scalar norm_bound_ratio = 0;  // besov_norm(g) / l^q{2^{k alpha} ||g_k||_p}
};

// g = sum_k D_k(g_k) with the synthesis norm bound ratio.
SynthesisResult lp_synthesis(const AIStack& st, const std::map<int, GridFunction>& gk,
                             const BesovParams& bp);

}  // namespace mabesov
