#pragma once

#include <filesystem>

#include "mabesov/config.hpp"

namespace mabesov {

// Shared invocation state: parsed config, effective seed, output directory.
struct RunContext {
  ExperimentConfig cfg;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;

  std::uint64_t config_hash() const { return cfg.hash(seed); }
};

// Exit codes: 0 pass, 2 config error, 3 numerical failure, 4 property-suite
// failure. Config and numerical errors are raised as exceptions and mapped
// by the CLI driver; the commands return 0 or 4.
int cmd_constants(const RunContext& ctx);
int cmd_ai_check(const RunContext& ctx);
int cmd_reproduce(const RunContext& ctx);
int cmd_besov(const RunContext& ctx);
int cmd_sio(const RunContext& ctx);

}  // namespace mabesov
