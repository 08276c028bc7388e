#pragma once

#include <cmath>

#include "mabesov/types.hpp"

namespace mabesov {

// Radial cutoff profile for the kernel construction: 1 on [0,r1], 0 on
// [r2,inf), quintic smoothstep in between (C^2 at both junctions, so the
// midpoint value is exactly 1/2). Only r >= 0 occurs since the argument is
// 2^k rho_bar.
struct BumpProfile {
  Scalar r1 = 1.0;
  Scalar r2 = 2.0;

  Scalar operator()(Scalar r) const {
    if (r < 0) throw std::invalid_argument("bump profile argument must be nonnegative");
    if (r <= r1) return 1.0;
    if (r >= r2) return 0.0;
    const Scalar u = (r - r1) / (r2 - r1);
    const Scalar s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    return 1.0 - s;
  }
};

inline Scalar bump(Scalar r) { return BumpProfile{}(r); }

}  // namespace mabesov
