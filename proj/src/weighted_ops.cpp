#include "mabesov/weighted_ops.hpp"

#include <cmath>

#include "mabesov/rng.hpp"

namespace mabesov {

GridFunction apply(const KernelMatrix& A, const DiscretizedDomain& g, const GridFunction& f) {
  return A * g.weights.cwiseProduct(f);
}

KernelMatrix wprod(const KernelMatrix& A, const KernelMatrix& B, const DiscretizedDomain& g) {
  KernelMatrix AW = A * g.weights.asDiagonal();
  KernelMatrix P = AW * B;
  P.prune(0.0);
  return P;
}

KernelMatrix weighted_identity(const DiscretizedDomain& g) {
  KernelMatrix I(g.size(), g.size());
  I.reserve(Eigen::VectorXi::Constant(static_cast<int>(g.size()), 1));
  for (Index i = 0; i < g.size(); ++i) I.insert(i, i) = 1.0 / g.weights[i];
  I.makeCompressed();
  return I;
}

namespace {

// max over columns j of sum_i w_i |A(i,j)|
Scalar norm_one(const DiscretizedDomain& g, const KernelMatrix& A) {
  Scalar best = 0;
  for (int j = 0; j < A.outerSize(); ++j) {
    Scalar s = 0;
    for (KernelMatrix::InnerIterator it(A, j); it; ++it) s += g.weights[it.row()] * std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

Scalar op_norm(const DiscretizedDomain& g, const KernelMatrix& A, Scalar p) {
  if (p == 1) return norm_one(g, A);
  if (p == kInf) {
    const KernelMatrix At = A.transpose();
    return norm_one(g, At);
  }
  if (p == 2) {
    const Index n = g.size();
    GridFunction v = random_vector(n, 0x5eedf00dull ^ static_cast<std::uint64_t>(n));
    v /= std::sqrt(inner(g, v, v));
    const KernelMatrix At = A.transpose();
    Scalar lambda = 0;
    for (int it = 0; it < 200; ++it) {
      // weighted normal operator f -> A^T (w . A (w . f))
      GridFunction u = apply(A, g, v);
      GridFunction z = apply(At, g, u);
      const Scalar nz = std::sqrt(inner(g, z, z));
      if (nz == 0) return 0;
      const Scalar next = inner(g, v, z);  // Rayleigh quotient, |v|_mu = 1
      z /= nz;
      const bool settled = it > 0 && std::abs(next - lambda) <= 1e-8 * std::max(next, 1e-300);
      lambda = next;
      v.swap(z);
      if (settled) break;
    }
    return std::sqrt(std::max(lambda, 0.0));
  }
  throw std::invalid_argument("op_norm supports p in {1, 2, inf} only");
}

}  // namespace mabesov
