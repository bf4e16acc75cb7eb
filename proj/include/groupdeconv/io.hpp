#pragma once

#include "bandwidth.hpp"
#include "cutoff.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "inversion.hpp"
#include "samples.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace groupdeconv {

//! "x,fhat" header then one row per grid point, LF endings, 17 significant digits.
inline std::string
density_csv(const DensityEstimate& est)
{
  std::string out = "x,fhat\n";
  char buf[64];
  for (std::size_t i = 0; i < est.xgrid.count; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", est.xgrid.at(i), est.values[i]);
    out += buf;
  }
  return out;
}

inline nlohmann::json
to_json(const CutoffRecord& c)
{
  nlohmann::json j{ { "value", c.value }, { "rule", to_string(c.rule) } };
  switch (c.rule) {
    case CutoffRule::adaptive:
      j["eta"] = c.eta;
      j["threshold"] = c.threshold;
      j["threshold_hit"] = c.threshold_hit;
      j["cap"] = c.cap;
      j["scan_resolution"] = c.scan_resolution;
      break;
    case CutoffRule::diagnostic:
      j["gamma"] = c.eta;
      j["eps"] = c.eps;
      break;
    default:
      break;
  }
  return j;
}

inline nlohmann::json
to_json(const DensityEstimate& est, const nlohmann::json& metadata = nlohmann::json::object())
{
  return { { "grid",
             { { "x_min", est.xgrid.x_min },
               { "x_max", est.xgrid.x_max },
               { "count", est.xgrid.count } } },
           { "values", est.values },
           { "cutoff", to_json(est.cutoff) },
           { "group_size", est.group_size },
           { "provenance", { { "n", est.provenance.n }, { "source", est.provenance.source } } },
           { "metadata", metadata } };
}

inline void
write_file(const std::string& path, const std::string& contents)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out)
    throw IoError("failed writing '" + path + "'");
}

//! Law from "name" (simulation-study parameters) or "name:a,b".
inline TestLaw
parse_law(std::string_view spec)
{
  const auto colon = spec.find(':');
  const std::string name(detail::trim(spec.substr(0, colon)));
  std::optional<std::pair<double, double>> params;
  if (colon != std::string_view::npos) {
    const auto rest = spec.substr(colon + 1);
    const auto comma = rest.find(',');
    double a = 0, b = 0;
    if (comma == std::string_view::npos ||
        !detail::parse_double(detail::trim(rest.substr(0, comma)), a) ||
        !detail::parse_double(detail::trim(rest.substr(comma + 1)), b))
      throw ParameterError("law parameters must be 'name:a,b' (got '" + std::string(spec) + "')");
    params = { a, b };
  }
  auto pick = [&](double a, double b) { return params ? *params : std::pair{ a, b }; };
  if (name == "normal") {
    auto [a, b] = pick(2.0, 1.0);
    return TestLaw::normal(a, b);
  }
  if (name == "gumbel") {
    auto [a, b] = pick(3.0, 1.0);
    return TestLaw::gumbel(a, b);
  }
  if (name == "gamma") {
    auto [a, b] = pick(6.0, 3.0);
    return TestLaw::gamma(a, b);
  }
  if (name == "laplace") {
    auto [a, b] = pick(0.5, 1.0 / 3.0);
    return TestLaw::laplace(a, b);
  }
  throw ParameterError("unknown law '" + name + "' (expected normal, gumbel, gamma or laplace)");
}

//! Flat `key = value` file; `#` starts a comment. Duplicate keys are an error.
inline std::map<std::string, std::string>
parse_key_values(std::istream& in)
{
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty())
      continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(detail::concat("line ", lineno, ": expected 'key = value'"), lineno, 1);
    const std::string key(detail::trim(view.substr(0, eq)));
    const std::string value(detail::trim(view.substr(eq + 1)));
    if (key.empty())
      throw ParseError(detail::concat("line ", lineno, ": empty key"), lineno, 1);
    if (!out.emplace(key, value).second)
      throw ParseError(detail::concat("line ", lineno, ": duplicate key '", key, "'"), lineno, 1);
  }
  return out;
}

namespace detail {

inline std::vector<std::string>
split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ';' || c == ' ' || c == '\t') {
      if (!cur.empty())
        out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty())
    out.push_back(cur);
  return out;
}

template<typename T>
T
parse_integer(const std::string& key, const std::string& s)
{
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParameterError("config key '" + key + "': '" + s + "' is not an integer");
  return v;
}

} // namespace detail

//! Scenario grid from a key-value config. Keys: laws, ns, ks (whitespace or
//! ';' separated lists; a law may carry parameters, e.g. normal:2,1),
//! replications, eta, seed. Missing keys keep the simulation-study defaults.
inline ScenarioGrid
parse_scenario_config(std::istream& in)
{
  const auto kv = parse_key_values(in);
  ScenarioGrid grid = ScenarioGrid::study();
  for (const auto& [key, value] : kv) {
    if (key == "laws") {
      grid.laws.clear();
      for (const auto& s : detail::split_list(value))
        grid.laws.push_back(parse_law(s));
    } else if (key == "ns") {
      grid.ns.clear();
      for (const auto& s : detail::split_list(value))
        grid.ns.push_back(detail::parse_integer<std::size_t>(key, s));
    } else if (key == "ks") {
      grid.ks.clear();
      for (const auto& s : detail::split_list(value))
        grid.ks.push_back(detail::parse_integer<int>(key, s));
    } else if (key == "replications") {
      grid.replications = detail::parse_integer<std::size_t>(key, value);
    } else if (key == "seed") {
      grid.master_seed = detail::parse_integer<std::uint64_t>(key, value);
    } else if (key == "eta") {
      if (!detail::parse_double(value, grid.eta))
        throw ParameterError("config key 'eta': '" + value + "' is not a number");
    } else {
      throw ParameterError("unknown config key '" + key + "'");
    }
  }
  grid.validate();
  return grid;
}

} // namespace groupdeconv
