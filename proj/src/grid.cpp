#include "mabesov/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mabesov {

DiscretizedDomain build_grid(const ConvexPotential& pot, int resolution) {
  if (resolution < 16) throw ConfigError("grid resolution must be at least 16 nodes per axis");

  DiscretizedDomain g;
  g.dim = pot.dim;
  g.resolution = resolution;
  g.lo = pot.lo;
  g.hi = pot.hi;
  g.cell = Vector(pot.dim);
  g.cell_volume = 1.0;
  for (int d = 0; d < pot.dim; ++d) {
    g.cell[d] = pot.width(d) / resolution;
    g.cell_volume *= g.cell[d];
  }

  const Index n = pot.dim == 1 ? resolution : Index(resolution) * resolution;
  g.nodes.resize(n, pot.dim);
  g.weights.resize(n);
  g.node_grads.resize(n, pot.dim);
  g.node_phis.resize(n);

  for (Index i = 0; i < n; ++i) {
    Vector x(pot.dim);
    if (pot.dim == 1) {
      x[0] = pot.lo[0] + (static_cast<Scalar>(i) + 0.5) * g.cell[0];
    } else {
      const Index ix = i / resolution, iy = i % resolution;
      x[0] = pot.lo[0] + (static_cast<Scalar>(ix) + 0.5) * g.cell[0];
      x[1] = pot.lo[1] + (static_cast<Scalar>(iy) + 0.5) * g.cell[1];
    }
    const Matrix h = pot.hess(x);
    const Scalar det = pot.dim == 1 ? h(0, 0) : h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
    const bool spd = pot.dim == 1 ? det > 0 : (h(0, 0) > 0 && det > 0);
    if (!spd && !pot.allow_degenerate)
      throw NumericError("Hessian not positive definite at a grid node (strict convexity)");
    g.nodes.row(i) = x.transpose();
    g.weights[i] = det * g.cell_volume;
    g.node_grads.row(i) = pot.grad(x).transpose();
    g.node_phis[i] = pot.phi(x);
  }

  if (!pot.allow_degenerate) {
    const Scalar err = derivative_consistency(pot, 16, 0x9e3779b9u);
    if (err > 1e-5)
      throw NumericError("supplied derivatives disagree with finite differences of phi");
  }
  return g;
}

Scalar integrate(const DiscretizedDomain& g, const GridFunction& f) {
  return g.weights.dot(f);
}

Scalar lp_norm(const DiscretizedDomain& g, const GridFunction& f, Scalar p) {
  if (p < 1) throw std::invalid_argument("lp_norm requires p >= 1");
  if (p == kInf) return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
  if (p == 1) return g.weights.dot(f.cwiseAbs());
  if (p == 2) return std::sqrt(g.weights.dot(f.cwiseAbs2()));
  Scalar s = 0;
  for (Index i = 0; i < f.size(); ++i) s += g.weights[i] * std::pow(std::abs(f[i]), p);
  return std::pow(s, 1.0 / p);
}

Scalar inner(const DiscretizedDomain& g, const GridFunction& f, const GridFunction& h) {
  return (g.weights.array() * f.array() * h.array()).sum();
}

void write_grid_function_csv(const std::filesystem::path& path, const GridFunction& f) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << "node_index,value\n";
  char buf[64];
  for (Index i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g\n", static_cast<long long>(i), f[i]);
    out << buf;
  }
}

GridFunction read_grid_function_csv(const std::filesystem::path& path, Index expected_size) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid function csv: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("node_index", 0) != 0)
    throw ConfigError("grid function csv must start with a node_index,value header");
  GridFunction f = GridFunction::Zero(expected_size);
  Index seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tok;
    if (!std::getline(ss, tok, ',')) throw ConfigError("malformed grid function csv row");
    const Index idx = std::stoll(tok);
    if (!std::getline(ss, tok, ',')) throw ConfigError("malformed grid function csv row");
    if (idx < 0 || idx >= expected_size)
      throw ConfigError("grid function csv node index out of range");
    f[idx] = std::stod(tok);
    ++seen;
  }
  if (seen != expected_size) throw ConfigError("grid function csv row count mismatch");
  return f;
}

}  // namespace mabesov
