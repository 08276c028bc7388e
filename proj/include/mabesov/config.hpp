#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mabesov/types.hpp"

namespace mabesov {

// Flat key=value configuration with dotted keys, one per line, '#' comments.
struct ExperimentConfig {
  std::map<std::string, std::string> kv;

  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig parse(const std::string& text);

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  std::string str(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  Scalar num(const std::string& key, Scalar fallback) const;
  long integer(const std::string& key, long fallback) const;
  bool flag(const std::string& key, bool fallback) const;

  // comma-separated reals; "inf" accepted
  std::vector<Scalar> num_list(const std::string& key, const std::vector<Scalar>& fallback) const;

  // canonical content hash; output_dir is excluded, the effective seed mixed in
  std::uint64_t hash(std::uint64_t seed) const;
};

Scalar parse_exponent(const std::string& tok);  // "inf" -> infinity
std::string format_exponent(Scalar p);

// Atomic CSV writer: temp file + rename, trailing `# config_hash=...` line.
class CsvWriter {
 public:
  CsvWriter(std::filesystem::path path, std::string header);
  void row(const std::string& line) { rows_.push_back(line); }
  // formats columns with %.12g, joining with commas
  void num_row(const std::vector<Scalar>& cols);
  void commit(std::uint64_t config_hash);

  static std::string format(Scalar v);

 private:
  std::filesystem::path path_;
  std::string header_;
  std::vector<std::string> rows_;
};

}  // namespace mabesov
