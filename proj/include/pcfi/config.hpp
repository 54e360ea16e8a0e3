#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "pcfi/coherence.hpp"
#include "pcfi/types.hpp"

// Run configuration shared by the command-line tools. Settings come from, in
// increasing precedence: built-in defaults, the file named by PCFI_CONFIG,
// the file passed via --config, and explicit command-line flags.
namespace pcfi {

struct RunConfig {
  Tolerances<double> tol;
  SearchConfig<double> search;
  std::string output_format = "json";  // "json" or "csv"
  std::uint64_t seed = 12345;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\'')))
    return v.substr(1, v.size() - 2);
  return v;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

inline long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ValidationError("config: bad integer value for " + key + ": '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("config: bad boolean value for " + key + ": '" + v + "'");
}

}  // namespace detail

// Applies one key=value setting; throws ValidationError on unknown keys or
// malformed values.
inline void apply_config_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
  using detail::to_bool;
  using detail::to_double;
  using detail::to_int;
  const std::string v = detail::unquote(raw);
  if (key == "tolerances.herm") cfg.tol.herm = to_double(key, v);
  else if (key == "tolerances.trace") cfg.tol.trace = to_double(key, v);
  else if (key == "tolerances.psd") cfg.tol.psd = to_double(key, v);
  else if (key == "tolerances.eig") cfg.tol.eig = to_double(key, v);
  else if (key == "tolerances.sqrt") cfg.tol.sqrt = to_double(key, v);
  else if (key == "tolerances.p_floor") cfg.tol.p_floor = to_double(key, v);
  else if (key == "search.n_restarts") cfg.search.n_restarts = static_cast<int>(to_int(key, v));
  else if (key == "search.n_groups_max") cfg.search.n_groups_max = static_cast<Index>(to_int(key, v));
  else if (key == "search.seed") cfg.search.seed = static_cast<std::uint64_t>(to_int(key, v));
  else if (key == "search.step_tolerance") cfg.search.step_tolerance = to_double(key, v);
  else if (key == "search.max_iters") cfg.search.max_iters = static_cast<int>(to_int(key, v));
  else if (key == "search.continuous_deriv") cfg.search.continuous_deriv = to_bool(key, v);
  else if (key == "output_format") {
    if (v != "json" && v != "csv")
      throw ValidationError("config: output_format must be json or csv, got '" + v + "'");
    cfg.output_format = v;
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_int(key, v));
  } else {
    throw ValidationError("config: unknown key '" + key + "'");
  }
}

// TOML-style key = value lines; '#' starts a comment; blank lines ignored.
inline void parse_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config " + origin + ":" + std::to_string(lineno) +
                            ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ValidationError("config " + origin + ":" + std::to_string(lineno) +
                            ": empty key or value");
    apply_config_setting(cfg, key, value);
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  parse_config_text(cfg, buf.str(), path);
}

// Defaults, then PCFI_CONFIG, then the --config file if given.
inline RunConfig resolve_config(const std::string& cli_config_path) {
  RunConfig cfg;
  if (const char* env = std::getenv("PCFI_CONFIG"); env && *env) load_config_file(cfg, env);
  if (!cli_config_path.empty()) load_config_file(cfg, cli_config_path);
  return cfg;
}

}  // namespace pcfi
