// mabesov: batch experiments for section geometry, approximation-to-identity
// kernels, Calderon reproduction, Besov norms and Monge-Ampere singular
// integrals. One experiment per invocation; CSV reports in the output dir.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "mabesov/cli_commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monge-Ampere Besov experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long seed = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--seed", seed, "override config seed");
    sub->add_option("--out", out_dir, "override config output_dir");
  };

  CLI::App* c_constants = app.add_subcommand("constants", "estimate section constants");
  CLI::App* c_ai = app.add_subcommand("ai-check", "verify approximation-to-identity properties");
  CLI::App* c_repro = app.add_subcommand("reproduce", "Calderon reproduction sweep over N");
  CLI::App* c_besov = app.add_subcommand("besov", "Besov norms and cross-stack equivalence");
  CLI::App* c_sio = app.add_subcommand("sio", "singular integral conditions and bounds");
  for (CLI::App* sub : {c_constants, c_ai, c_repro, c_besov, c_sio}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    mabesov::RunContext ctx;
    ctx.cfg = mabesov::ExperimentConfig::load(config_path);
    ctx.seed = seed >= 0 ? static_cast<std::uint64_t>(seed)
                         : static_cast<std::uint64_t>(ctx.cfg.integer("seed", 1));
    ctx.out_dir = out_dir.empty() ? ctx.cfg.str("output_dir", "out") : out_dir;

    if (c_constants->parsed()) return mabesov::cmd_constants(ctx);
    if (c_ai->parsed()) return mabesov::cmd_ai_check(ctx);
    if (c_repro->parsed()) return mabesov::cmd_reproduce(ctx);
    if (c_besov->parsed()) return mabesov::cmd_besov(ctx);
    if (c_sio->parsed()) return mabesov::cmd_sio(ctx);
    return 2;
  } catch (const mabesov::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const mabesov::NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
