#include "mabesov/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mabesov {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has empty key");
    cfg.kv[key] = val;
  }
  return cfg;
}

std::string ExperimentConfig::str(const std::string& key, const std::string& fallback) const {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::string ExperimentConfig::require(const std::string& key) const {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("missing required config key: " + key);
  return it->second;
}

Scalar ExperimentConfig::num(const std::string& key, Scalar fallback) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return parse_exponent(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not a number: " + it->second);
  }
}

long ExperimentConfig::integer(const std::string& key, long fallback) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    size_t used = 0;
    const long v = std::stol(it->second, &used);
    if (used != it->second.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not an integer: " + it->second);
  }
}

bool ExperimentConfig::flag(const std::string& key, bool fallback) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("config key " + key + " is not a boolean: " + it->second);
}

std::vector<Scalar> ExperimentConfig::num_list(const std::string& key,
                                               const std::vector<Scalar>& fallback) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::vector<Scalar> out;
  std::istringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(parse_exponent(tok));
  }
  if (out.empty()) throw ConfigError("config key " + key + " is an empty list");
  return out;
}

std::uint64_t ExperimentConfig::hash(std::uint64_t seed) const {
  // FNV-1a over canonical "key=value\n" lines, output_dir excluded
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const std::string& s) {
    for (const unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [k, v] : kv) {
    if (k == "output_dir") continue;
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  for (int i = 0; i < 8; ++i) {
    h ^= (seed >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

Scalar parse_exponent(const std::string& tok) {
  if (tok == "inf" || tok == "Inf" || tok == "INF") return kInf;
  size_t used = 0;
  const Scalar v = std::stod(tok, &used);
  if (used != tok.size()) throw ConfigError("bad numeric token: " + tok);
  return v;
}

std::string format_exponent(Scalar p) {
  if (p == kInf) return "inf";
  return CsvWriter::format(p);
}

CsvWriter::CsvWriter(std::filesystem::path path, std::string header)
    : path_(std::move(path)), header_(std::move(header)) {}

std::string CsvWriter::format(Scalar v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void CsvWriter::num_row(const std::vector<Scalar>& cols) {
  std::string line;
  for (size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += format(cols[i]);
  }
  rows_.push_back(std::move(line));
}

void CsvWriter::commit(std::uint64_t config_hash) {
  std::filesystem::create_directories(path_.parent_path());
  const std::filesystem::path tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << header_ << "\n";
    for (const auto& r : rows_) out << r << "\n";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash));
    out << "# config_hash=" << buf << "\n";
  }
  std::filesystem::rename(tmp, path_);
}

}  // namespace mabesov
