#include "mabesov/cli_commands.hpp"

#include <cmath>
#include <sstream>

#include "mabesov/ma_sio.hpp"
#include "mabesov/rng.hpp"

namespace mabesov {

namespace {

Vector axis_values(const ExperimentConfig& cfg, const std::string& key, int dim, Scalar fallback) {
  const auto vals = cfg.num_list(key, {fallback});
  Vector v(dim);
  if (vals.size() == 1) {
    v.setConstant(vals[0]);
  } else if (static_cast<int>(vals.size()) == dim) {
    for (int d = 0; d < dim; ++d) v[d] = vals[d];
  } else {
    throw ConfigError(key + " must list one value or one per axis");
  }
  return v;
}

ConvexPotential config_potential(const ExperimentConfig& cfg) {
  const std::string name = cfg.str("potential.name", "quadratic");
  const int dim = static_cast<int>(cfg.integer("potential.dim", name == "anisotropic2d" ? 2 : 1));
  const Vector lo = axis_values(cfg, "domain.lo", dim, -4.0);
  const Vector hi = axis_values(cfg, "domain.hi", dim, 4.0);
  return potential_by_name(name, dim, lo, hi);
}

DiscretizedDomain config_grid(const ExperimentConfig& cfg, const ConvexPotential& pot) {
  return build_grid(pot, static_cast<int>(cfg.integer("grid.resolution", 256)));
}

AIStack config_stack(const ExperimentConfig& cfg, const DiscretizedDomain& g,
                     const ConvexPotential& pot, Scalar plateau = 1.0) {
  BumpProfile profile;
  profile.r1 = plateau;
  int k_min, k_max;
  if (cfg.has("scales.k_min") && cfg.str("scales.k_min", "auto") != "auto" &&
      cfg.has("scales.k_max") && cfg.str("scales.k_max", "auto") != "auto") {
    k_min = static_cast<int>(cfg.integer("scales.k_min", 0));
    k_max = static_cast<int>(cfg.integer("scales.k_max", 0));
  } else {
    std::tie(k_min, k_max) = admissible_scale_range(g, pot);
  }
  return build_stack(g, pot, k_min, k_max, profile);
}

struct Triple {
  BesovParams bp;
};

std::vector<Triple> config_triples(const ExperimentConfig& cfg) {
  const std::string spec = cfg.str("besov.triples", "0:2:2");
  std::vector<Triple> out;
  std::istringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::istringstream ts(tok);
    std::string a, p, q;
    if (!std::getline(ts, a, ':') || !std::getline(ts, p, ':') || !std::getline(ts, q, ':'))
      throw ConfigError("besov.triples entries must be alpha:p:q");
    out.push_back({BesovParams{parse_exponent(a), parse_exponent(p), parse_exponent(q)}});
  }
  if (out.empty()) throw ConfigError("besov.triples is empty");
  return out;
}

}  // namespace

int cmd_constants(const RunContext& ctx) {
  const auto pot = config_potential(ctx.cfg);
  const auto grid = config_grid(ctx.cfg, pot);
  const int samples = static_cast<int>(ctx.cfg.integer("samples", 400));
  const SectionConstants sc = estimate_constants(grid, pot, samples, ctx.seed);
  CsvWriter csv(ctx.out_dir / "constants.csv", "a0,theta,doubling,eps_reg,sample_count");
  csv.num_row({sc.a0, sc.theta, sc.doubling, sc.eps_reg, static_cast<Scalar>(sc.sample_count)});
  csv.commit(ctx.config_hash());
  return 0;
}

int cmd_ai_check(const RunContext& ctx) {
  const auto pot = config_potential(ctx.cfg);
  const auto grid = config_grid(ctx.cfg, pot);
  AIStack st = config_stack(ctx.cfg, grid, pot);

  if (ctx.cfg.flag("inject.asymmetry", false)) {
    // testing hook: spoil one kernel entry to exercise the failure path
    KernelMatrix& S = st.S.at(st.k_min);
    for (int c = 0; c < S.outerSize(); ++c) {
      bool done = false;
      for (KernelMatrix::InnerIterator it(S, c); it; ++it)
        if (it.row() != c && it.value() > 0) {
          it.valueRef() += 1e-3;
          done = true;
          break;
        }
      if (done) break;
    }
  }

  const int samples = static_cast<int>(ctx.cfg.integer("samples", 200));
  const AIPropertyReport rep = verify_ai_properties(st, samples, ctx.seed);
  CsvWriter csv(ctx.out_dir / "ai_properties.csv", "property,scale_k,constant,exponent,max_violation");
  for (const auto& r : rep.rows) {
    std::ostringstream line;
    line << r.property << ',' << r.k << ',' << CsvWriter::format(r.constant) << ','
         << CsvWriter::format(r.exponent) << ',' << CsvWriter::format(r.max_violation);
    csv.row(line.str());
  }
  csv.commit(ctx.config_hash());
  return rep.exact_violation > 1e-8 ? 4 : 0;
}

int cmd_reproduce(const RunContext& ctx) {
  const auto pot = config_potential(ctx.cfg);
  const auto grid = config_grid(ctx.cfg, pot);
  const AIStack st = config_stack(ctx.cfg, grid, pot);

  GridFunction f;
  const std::string fcsv = ctx.cfg.str("reproduce.f_csv", "");
  if (!fcsv.empty()) {
    f = read_grid_function_csv(fcsv, grid.size());
  } else {
    f = random_in_band(st, ctx.seed);  // documented default: seeded in-band noise
  }

  const int n_cap = (st.k_max - st.k_min) / 2;
  std::vector<Scalar> sweep;
  for (int N = 1; N <= std::min(4, n_cap); ++N) sweep.push_back(N);
  sweep = ctx.cfg.num_list("calderon.N_sweep", sweep);

  const PairProducts pp = compute_pair_products(st);
  const int terms = static_cast<int>(ctx.cfg.integer("calderon.neumann_terms", 100));
  const Scalar tol = ctx.cfg.num("calderon.residual_tol", 1e-9);

  CsvWriter csv(ctx.out_dir / "reproduce.csv", "N,residual,neumann_terms_used,rn_norm2");
  for (const Scalar Ns : sweep) {
    const int N = static_cast<int>(Ns);
    const CalderonOperator op(st, N, pp, terms, tol);
    Scalar residual = std::nan("");
    Scalar used = 0;
    if (op.rn_norm2 < 1.0) {
      const ReproduceResult rr = reproduce(op, f);
      residual = rr.residual;
      used = rr.neumann_terms_used;
    }
    csv.num_row({static_cast<Scalar>(N), residual, used, op.rn_norm2});
  }
  csv.commit(ctx.config_hash());
  return 0;
}

int cmd_besov(const RunContext& ctx) {
  const auto pot = config_potential(ctx.cfg);
  const auto grid = config_grid(ctx.cfg, pot);
  const AIStack stack_a = config_stack(ctx.cfg, grid, pot);
  const auto triples = config_triples(ctx.cfg);
  for (const auto& t : triples) check_admissible(stack_a, t.bp);  // exit 2 before any output

  CsvWriter besov_csv(ctx.out_dir / "besov.csv", "alpha,p,q,k,block_norm,total_norm");
  for (const auto& t : triples) {
    const GridFunction f = random_in_band(stack_a, ctx.seed);
    const LPDecomposition dec = lp_decompose(stack_a, f, t.bp);
    for (const auto& [k, bn] : dec.block_norms) {
      std::ostringstream line;
      line << CsvWriter::format(t.bp.alpha) << ',' << format_exponent(t.bp.p) << ','
           << format_exponent(t.bp.q) << ',' << k << ',' << CsvWriter::format(bn) << ','
           << CsvWriter::format(dec.norm);
      besov_csv.row(line.str());
    }
  }
  besov_csv.commit(ctx.config_hash());

  const Scalar plateau_b = ctx.cfg.num("equivalence.plateau_b", 0.8);
  const AIStack stack_b = config_stack(ctx.cfg, grid, pot, plateau_b);
  const int ensemble = static_cast<int>(ctx.cfg.integer("besov.ensemble", 50));
  const EquivalenceReport eq =
      norm_equivalence_ensemble(stack_a, stack_b, triples.front().bp, ensemble, ctx.seed);
  CsvWriter eq_csv(ctx.out_dir / "equivalence.csv", "sample,ratio_ab,ratio_ba");
  for (const auto& r : eq.rows)
    eq_csv.num_row({static_cast<Scalar>(r.sample), r.ratio_ab, r.ratio_ba});
  eq_csv.commit(ctx.config_hash());
  return 0;
}

int cmd_sio(const RunContext& ctx) {
  const auto pot = config_potential(ctx.cfg);
  const auto grid = config_grid(ctx.cfg, pot);
  const AIStack st = config_stack(ctx.cfg, grid, pot);

  int i_min = static_cast<int>(ctx.cfg.integer("family.i_min", -st.k_max));
  int i_max = static_cast<int>(ctx.cfg.integer("family.i_max", -st.k_min));
  const std::string kind = ctx.cfg.str("family.kind", "canonical");

  MAKernelFamily fam;
  AIStack stack_b;  // keeps the two-bump second stack alive
  if (kind == "canonical") {
    std::vector<int> signs;
    if (ctx.cfg.str("family.signs", "random") == "plus") {
      signs.assign(i_max - i_min + 1, 1);
    } else {
      signs = random_signs(i_max - i_min + 1, ctx.cfg.integer("family.signs_seed", 1));
    }
    fam = build_canonical_family(st, signs, i_min, i_max);
  } else if (kind == "two_bump") {
    stack_b = config_stack(ctx.cfg, grid, pot, ctx.cfg.num("equivalence.plateau_b", 0.8));
    fam = build_two_bump_family(st, stack_b, i_min, i_max);
  } else {
    throw ConfigError("family.kind must be canonical or two_bump");
  }

  if (ctx.cfg.flag("inject.mean_shift", false)) {
    Scalar peak = 0;
    for (const auto& [i, Ki] : fam.kernels)
      for (int c = 0; c < Ki.outerSize(); ++c)
        for (KernelMatrix::InnerIterator it(Ki, c); it; ++it)
          peak = std::max(peak, std::abs(it.value()));
    fam = mean_shift_family(fam, 0.01 * peak);
  }

  const int samples = static_cast<int>(ctx.cfg.integer("samples", 64));
  const DConditionReport rep = verify_D_conditions(fam, samples, ctx.seed);
  CsvWriter cond_csv(ctx.out_dir / "sio_conditions.csv", "condition,i,constant,max_violation");
  for (const auto& r : rep.rows) {
    std::ostringstream line;
    line << r.condition << ',' << r.i << ',' << CsvWriter::format(r.constant) << ','
         << CsvWriter::format(r.max_violation);
    cond_csv.row(line.str());
  }
  cond_csv.commit(ctx.config_hash());
  if (!rep.pass) return 4;

  const auto triples = config_triples(ctx.cfg);
  const int ensemble = static_cast<int>(ctx.cfg.integer("besov.ensemble", 50));
  CsvWriter bounds_csv(ctx.out_dir / "sio_bounds.csv", "alpha,p,q,seed,ratio");
  for (const auto& t : triples) {
    const Scalar ratio =
        besov_bound_experiment(fam, st, t.bp, ensemble, ctx.seed, rep.eps1_fit);
    std::ostringstream line;
    line << CsvWriter::format(t.bp.alpha) << ',' << format_exponent(t.bp.p) << ','
         << format_exponent(t.bp.q) << ',' << ctx.seed << ',' << CsvWriter::format(ratio);
    bounds_csv.row(line.str());
  }
  bounds_csv.commit(ctx.config_hash());
  return 0;
}

}  // namespace mabesov
