#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fairfuse/blackbox.hpp"
#include "fairfuse/csv.hpp"
#include "fairfuse/errors.hpp"
#include "fairfuse/frontier.hpp"

// Run configuration: one human-editable key-value file with [provider NAME]
// sections; command-line flags override file values. Relative paths in the
// file resolve against the file's own directory.

namespace fairfuse {

struct BetaGrid {
  double lo = 1e-5;
  double hi = 1e2;
  std::size_t n = 50;
  bool include_zero = true;
};

struct RunConfig {
  std::string templates_path;
  std::string terms_path;
  std::string annotations_path;  // optional truth source
  std::string corpus_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  double split_fraction = 0.7;
  double tau = 0.1;
  double lambda = 1e-6;
  std::optional<double> beta;
  BetaGrid beta_grid;
  std::vector<double> budgets = {0.10};
  DistanceMode distance = DistanceMode::raw;
  std::string format = "table";  // table|json|csv
  bool intercept = false;
  std::vector<ProviderSpec> providers;

  /// Effective global seed: explicit value, else FAIRFUSE_SEED, else 0.
  std::uint64_t effective_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("FAIRFUSE_SEED")) {
      std::uint64_t v = 0;
      const auto res = std::from_chars(env, env + std::strlen(env), v);
      if (res.ec != std::errc{} || *res.ptr != '\0')
        throw ValidationError("FAIRFUSE_SEED is not an integer");
      return v;
    }
    return 0;
  }
};

/// Providers with derived seeds and loaded recorded tables. Synthetic
/// providers without an explicit seed get global_seed * 1000 + index + 1 so
/// their noise streams stay independent under one global seed.
inline std::vector<Provider> materialize_providers(const RunConfig& config) {
  if (config.providers.empty()) throw ValidationError("no providers configured");
  for (std::size_t i = 0; i < config.providers.size(); ++i)
    for (std::size_t j = i + 1; j < config.providers.size(); ++j)
      if (config.providers[i].name == config.providers[j].name)
        throw ValidationError("duplicate provider name '" + config.providers[i].name + "'");
  const std::uint64_t global = config.effective_seed();
  std::vector<Provider> out;
  out.reserve(config.providers.size());
  for (std::size_t i = 0; i < config.providers.size(); ++i) {
    Provider p;
    p.spec = config.providers[i];
    if (p.spec.seed == kSeedUnset)
      p.spec.seed = global * 1000 + static_cast<std::uint64_t>(i) + 1;
    validate_provider(p.spec);
    if (p.spec.kind == ProviderKind::recorded)
      p.recorded = std::make_shared<const RecordedTable>(
          load_recorded_table(p.spec.path, p.spec.name));
    out.push_back(std::move(p));
  }
  return out;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline double config_double(const std::string& v, const std::string& key) {
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ParseError("config: '" + key + "' is not a number: '" + v + "'");
  return out;
}

inline std::uint64_t config_uint(const std::string& v, const std::string& key) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ParseError("config: '" + key + "' is not a non-negative integer: '" + v + "'");
  return out;
}

inline std::string resolve_path(const std::string& value, const std::filesystem::path& base) {
  std::filesystem::path p(value);
  if (p.is_absolute()) return p.string();
  return (base / p).lexically_normal().string();
}

}  // namespace detail

/// Parse "lo:hi:n" (log-spaced n points in [lo, hi], plus beta = 0).
inline BetaGrid parse_beta_grid(const std::string& s) {
  BetaGrid g;
  const std::size_t p1 = s.find(':');
  const std::size_t p2 = s.find(':', p1 == std::string::npos ? p1 : p1 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos)
    throw ParseError("beta grid must be lo:hi:n, got '" + s + "'");
  g.lo = detail::config_double(s.substr(0, p1), "beta-grid lo");
  g.hi = detail::config_double(s.substr(p1 + 1, p2 - p1 - 1), "beta-grid hi");
  g.n = static_cast<std::size_t>(detail::config_uint(s.substr(p2 + 1), "beta-grid n"));
  if (!(g.lo > 0.0) || !(g.hi >= g.lo) || g.n == 0)
    throw ParseError("beta grid needs 0 < lo <= hi and n >= 1");
  return g;
}

/// Comma-separated non-negative fractions.
inline std::vector<double> parse_budget_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    const std::string item = detail::trim(s.substr(start, end - start));
    if (!item.empty()) {
      const double b = detail::config_double(item, "budget");
      if (!(b >= 0.0)) throw ParseError("budgets must be >= 0");
      out.push_back(b);
    }
    start = end + 1;
  }
  if (out.empty()) throw ParseError("empty budget list");
  return out;
}

/// Load a config file into a RunConfig. Unknown keys are errors.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  RunConfig cfg;
  ProviderSpec* current = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;

    if (s.front() == '[') {
      if (s.back() != ']')
        throw ParseError("config line " + std::to_string(line_no) + ": unterminated section");
      const std::string section = detail::trim(s.substr(1, s.size() - 2));
      if (section.rfind("provider ", 0) != 0)
        throw ParseError("config line " + std::to_string(line_no) + ": unknown section '" +
                         section + "'");
      ProviderSpec spec;
      spec.name = detail::trim(section.substr(9));
      if (spec.name.empty())
        throw ParseError("config line " + std::to_string(line_no) + ": provider needs a name");
      spec.seed = UINT64_MAX;  // "unset" marker; derived from the global seed later
      cfg.providers.push_back(spec);
      current = &cfg.providers.back();
      continue;
    }

    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));

    if (current) {
      if (key == "kind") {
        if (value == "synthetic") current->kind = ProviderKind::synthetic;
        else if (value == "recorded") current->kind = ProviderKind::recorded;
        else
          throw ParseError("config line " + std::to_string(line_no) +
                           ": kind must be synthetic or recorded");
      } else if (key == "bias") {
        current->bias = detail::config_double(value, key);
      } else if (key == "noise_sigma") {
        current->noise_sigma = detail::config_double(value, key);
      } else if (key == "seed") {
        current->seed = detail::config_uint(value, key);
      } else if (key == "path") {
        current->path = detail::resolve_path(value, base);
      } else {
        throw ParseError("config line " + std::to_string(line_no) + ": unknown provider key '" +
                         key + "'");
      }
      continue;
    }

    if (key == "templates") cfg.templates_path = detail::resolve_path(value, base);
    else if (key == "terms") cfg.terms_path = detail::resolve_path(value, base);
    else if (key == "annotations") cfg.annotations_path = detail::resolve_path(value, base);
    else if (key == "corpus") cfg.corpus_path = detail::resolve_path(value, base);
    else if (key == "out") cfg.out_dir = detail::resolve_path(value, base);
    else if (key == "seed") cfg.seed = detail::config_uint(value, key);
    else if (key == "split") cfg.split_fraction = detail::config_double(value, key);
    else if (key == "tau") cfg.tau = detail::config_double(value, key);
    else if (key == "lambda") cfg.lambda = detail::config_double(value, key);
    else if (key == "beta") cfg.beta = detail::config_double(value, key);
    else if (key == "beta_grid") cfg.beta_grid = parse_beta_grid(value);
    else if (key == "budgets") cfg.budgets = parse_budget_list(value);
    else if (key == "distance") cfg.distance = parse_distance_mode(value);
    else if (key == "format") cfg.format = value;
    else if (key == "intercept") cfg.intercept = (value == "true" || value == "1");
    else
      throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0))
    throw ParseError("config: split must be in (0, 1)");
  return cfg;
}

}  // namespace fairfuse
