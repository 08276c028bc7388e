#pragma once

#include <map>
#include <vector>

#include "mabesov/besov.hpp"

namespace mabesov {

// Affine map T with B(0,1/n) inside T(S(center,t)) inside B(0,1); the ruler
// for the normalized Hoelder conditions.
struct SectionNormalizer {
  Vector center;
  Scalar t = 0;
  Matrix A;
  Vector b;

  Vector operator()(const Vector& y) const { return A * y + b; }
  Scalar image_distance(const Vector& u, const Vector& v) const { return (A * (u - v)).norm(); }
};

// 1D: min/max member nodes map to -1/+1. 2D: whitening by the member
// point-set's inertia ellipsoid, scaled so members fill B(0,1); errors when
// the half-ball side of the sandwich cannot hold.
SectionNormalizer normalize_section(const DiscretizedDomain& g, const ConvexPotential& pot,
                                    const Vector& x, Scalar t);

// Kernel family {k_i} of a Monge-Ampere singular integral H = sum_i H_i.
struct MAKernelFamily {
  const AIStack* stack = nullptr;
  std::map<int, KernelMatrix> kernels;
  std::vector<int> signs;       // aligned with i_min..i_max
  int i_min = 0, i_max = 0;
  Scalar gamma = 0;             // declared Hoelder exponent (stack regularity)
  Scalar c1 = 0;                // measured (D4)/(D5) constant
  Scalar c2 = 0;                // measured (D6)/(D7) constant at gamma
  Scalar support_const = 0;     // supports live in S(., support_const * 2^i)
};

std::vector<int> random_signs(int n, std::uint64_t seed);

// k_i = sign_i * D_{-i}; (D3) is inherited from the block cancellation.
MAKernelFamily build_canonical_family(const AIStack& st, const std::vector<int>& signs, int i_min,
                                      int i_max);

// k_i = S^A_{-i} - S^B_{-i} for two differently shaped stacks on one grid;
// mean zero because both kernels mu-integrate to one.
MAKernelFamily build_two_bump_family(const AIStack& a, const AIStack& b, int i_min, int i_max);

// Negative control: adds a constant on each kernel's support, destroying the
// (D3) cancellation. Testing hook.
MAKernelFamily mean_shift_family(const MAKernelFamily& f, Scalar shift);

struct DConditionRow {
  std::string condition;
  int i = 0;
  Scalar constant = 0;
  Scalar max_violation = 0;
};

struct DConditionReport {
  std::vector<DConditionRow> rows;
  Scalar c1 = 0;
  Scalar c2 = 0;
  Scalar gamma_eff = 0;   // envelope-fit exponent of the (D6) quotients
  Scalar eps1_fit = 0;    // condition (A) proxy exponent
  Scalar d3_violation = 0;
  Scalar support_violation = 0;
  bool pass = false;

  const DConditionRow* find(const std::string& condition, int i) const;
};

DConditionReport verify_D_conditions(const MAKernelFamily& fam, int samples, std::uint64_t seed);

// Decay exponent of normalized-section image radii against the scale ratio,
// per the section structure condition.
Scalar fit_eps1(const AIStack& st, int samples, std::uint64_t seed);

KernelMatrix assemble_H(const MAKernelFamily& fam);
GridFunction apply_H(const MAKernelFamily& fam, const GridFunction& f);

// max ||Hf||_2 / ||f||_2 over random in-band f; optionally reports the
// operator 2-norm of the assembled H.
Scalar l2_bound_experiment(const MAKernelFamily& fam, int ensemble, std::uint64_t seed,
                           Scalar* op_norm2 = nullptr);

// max besov_norm(Hf)/besov_norm(f) over random in-band f. Gated by
// |alpha| < min(eps_fit, gamma * eps1)/4.
Scalar besov_bound_experiment(const MAKernelFamily& fam, const AIStack& st, const BesovParams& bp,
                              int ensemble, std::uint64_t seed, Scalar eps1);

struct PointwiseAORow {
  int k = 0, kp = 0;
  Scalar max_normalized = 0;
};

struct SixCaseRow {
  std::string name;
  int count = 0;
  Scalar fitted_slope = 0;  // of log2 ||D_k# H_j D_k'#||_1 against the
                            // predicted exponent combination
};

struct PointwiseAOReport {
  std::vector<PointwiseAORow> pairs;
  Scalar gap_exponent = 0;   // decay of max normalized entries in |k-k'|
  Scalar tail_exponent = 0;  // decay in rho_bar / 2^{k v k'} on the diagonal
  bool diagonal_dominates = false;
  std::vector<SixCaseRow> cases;
};

PointwiseAOReport pointwise_ao_check(const MAKernelFamily& fam, int samples, std::uint64_t seed);

}  // namespace mabesov
