#pragma once

#include "mabesov/grid.hpp"
#include "mabesov/types.hpp"

namespace mabesov {

// Kernel application (Af)_i = sum_j A(i,j) w_j f_j.
GridFunction apply(const KernelMatrix& A, const DiscretizedDomain& g, const GridFunction& f);

// Weighted composition (A o B)(i,j) = sum_z A(i,z) w_z B(z,j); the matrix of
// the operator product when both act through the weights.
KernelMatrix wprod(const KernelMatrix& A, const KernelMatrix& B, const DiscretizedDomain& g);

// Identity as a weighted kernel: A(i,j) = delta_ij / w_j.
KernelMatrix weighted_identity(const DiscretizedDomain& g);

// Operator norm on L^p_mu for p in {1, 2, inf}.
//   p = 1:   max_j sum_i w_i |A(i,j)|
//   p = inf: max_i sum_j |A(i,j)| w_j   (evaluated as the p=1 norm of A^T)
//   p = 2:   power iteration on the weighted normal operator, fixed seed
//            start vector, 200 iterations or relative change < 1e-8.
Scalar op_norm(const DiscretizedDomain& g, const KernelMatrix& A, Scalar p);

}  // namespace mabesov
