#pragma once

#include "groupdeconv/groupdeconv.hpp"
#include "groupdeconv/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace groupdeconv::cli {

enum ExitCode : int
{
  ok = 0,
  input_error = 2,
  numerical_error = 3,
  all_cells_failed = 4
};

struct EstimateConfig
{
  std::string input;
  double group_size = 0.0;
  double eta = 1.1;
  std::string cutoff = "adaptive";
  std::string law;
  std::optional<double> x_min, x_max;
  std::size_t x_count = 1024;
  double scan_resolution = 0.01;
  bool clip = false;
  std::string out = "estimate";
};

struct SimulateConfig
{
  std::vector<std::string> laws;
  std::vector<std::size_t> ns;
  std::vector<int> ks;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta;
  std::string config;
  bool quick = false;
  std::string out = "risk";
};

struct DiagnoseConfig
{
  std::string law;
  std::size_t n = 10000;
  double group_size = 5;
  double eps = 0.1;
  double delta = 0.1;
  double eta = 1.1;
  std::string input;
  std::uint64_t seed = 1;
  double u_max = 0.0;
  std::size_t u_count = 201;
  std::string out = "diagnose";
};

namespace detail {

inline std::string
fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

//! Parses --cutoff: adaptive | oracle | fixed:<m>.
inline CutoffRule
parse_cutoff(const std::string& s, double& fixed_m)
{
  if (s == "adaptive")
    return CutoffRule::adaptive;
  if (s == "oracle")
    return CutoffRule::oracle;
  if (s.rfind("fixed:", 0) == 0) {
    const std::string value = s.substr(6);
    if (!groupdeconv::detail::parse_double(value, fixed_m) || fixed_m <= 0)
      throw ParameterError("--cutoff fixed:<m> needs m > 0 (got '" + value + "')");
    return CutoffRule::fixed;
  }
  throw ParameterError("--cutoff must be adaptive, oracle or fixed:<m> (got '" + s + "')");
}

} // namespace detail

inline int
cmd_estimate(const EstimateConfig& cfg, std::ostream& out)
{
  groupdeconv::detail::require(cfg.group_size >= 1.0,
                               "group size must be >= 1 (got ", cfg.group_size, ")");
  groupdeconv::detail::require(cfg.eta > 1.0, "eta must be > 1 (got ", cfg.eta, ")");
  double fixed_m = 0.0;
  const CutoffRule rule = detail::parse_cutoff(cfg.cutoff, fixed_m);
  std::optional<TestLaw> law;
  if (!cfg.law.empty())
    law = parse_law(cfg.law);
  if (rule == CutoffRule::oracle && !law)
    throw ParameterError("--cutoff oracle requires --law");

  const auto sample = load_sample(cfg.input, cfg.group_size);
  XGrid xgrid = default_xgrid(sample, 8.0, cfg.x_count);
  if (cfg.x_min || cfg.x_max)
    xgrid = XGrid(cfg.x_min.value_or(xgrid.x_min), cfg.x_max.value_or(xgrid.x_max), cfg.x_count);

  AdaptiveOptions adaptive_options;
  adaptive_options.scan_resolution = cfg.scan_resolution;

  CutoffRecord cutoff;
  switch (rule) {
    case CutoffRule::adaptive:
      cutoff = adaptive_cutoff(sample, cfg.eta, adaptive_options);
      break;
    case CutoffRule::fixed:
      cutoff = CutoffRecord::fixed(fixed_m);
      break;
    case CutoffRule::oracle: {
      const double hi = adaptive_cap(sample.size(), sample.group_size(), adaptive_options);
      cutoff = oracle_cutoff(*law, sample, default_m_grid(hi), xgrid).cutoff;
      break;
    }
    default:
      break;
  }

  const StepPolicy policy;
  const double m = cutoff.value;
  const UGrid grid(m, grid_step(m, policy));
  const auto cf = evaluate_grid(sample, grid);
  const auto root = distinguished_root(cf, grid.u_max(), sample.group_size());
  auto est = invert(root, cutoff, xgrid, { .clip_and_renormalize = cfg.clip });
  est.provenance = { sample.size(), cfg.input };

  nlohmann::json meta{ { "eta", cfg.eta },
                       { "scan_resolution", cfg.scan_resolution },
                       { "bisection_tolerance", adaptive_options.tolerance },
                       { "x_grid_policy", "mean(Y)/K +- 8 sd(Y)/sqrt(K)" },
                       { "u_step", grid.step() },
                       { "u_step_policy", "m / ceil(max(m / 0.01, 4096))" },
                       { "clip_and_renormalize", cfg.clip } };
  if (law)
    meta["law"] = law->label();
  std::vector<nlohmann::json> warnings;
  for (const auto& w : root.warnings)
    warnings.push_back({ { "u", w.u }, { "condition", w.condition } });
  meta["warnings"] = warnings;

  write_file(cfg.out + ".csv", density_csv(est));
  write_file(cfg.out + ".json", groupdeconv::to_json(est, meta).dump(2) + "\n");
  out << "cutoff " << detail::fmt(m) << " (" << to_string(cutoff.rule) << ")";
  if (cutoff.rule == CutoffRule::adaptive && !cutoff.threshold_hit)
    out << " capped at n^(1/K)";
  out << "\nwrote " << cfg.out << ".csv and " << cfg.out << ".json\n";
  return ok;
}

inline ScenarioGrid
simulate_grid(const SimulateConfig& cfg)
{
  ScenarioGrid grid = ScenarioGrid::study();
  if (!cfg.config.empty()) {
    std::ifstream in(cfg.config);
    if (!in)
      throw IoError("cannot open '" + cfg.config + "'");
    grid = parse_scenario_config(in);
  }
  if (!cfg.laws.empty()) {
    grid.laws.clear();
    for (const auto& s : cfg.laws)
      grid.laws.push_back(parse_law(s));
  }
  if (!cfg.ns.empty())
    grid.ns = cfg.ns;
  if (!cfg.ks.empty())
    grid.ks = cfg.ks;
  if (cfg.quick)
    grid.replications = 50;
  if (cfg.reps)
    grid.replications = *cfg.reps;
  if (cfg.seed)
    grid.master_seed = *cfg.seed;
  if (cfg.eta)
    grid.eta = *cfg.eta;
  grid.validate();
  return grid;
}

inline int
cmd_simulate(const SimulateConfig& cfg, std::ostream& out)
{
  const ScenarioGrid grid = simulate_grid(cfg);
  const ReplicationOptions defaults;
  const auto report = run_grid(grid);

  std::ostringstream table;
  table << "# oracle: argmin over " << defaults.oracle_points << " log-spaced cutoffs in ["
        << defaults.oracle_lo << ", n^(1/K)] plus m_hat\n"
        << "# adaptive: scan_resolution=" << defaults.adaptive.scan_resolution
        << " bisection_tolerance=" << defaults.adaptive.tolerance << '\n'
        << "# x grid: law mean +- " << defaults.x_sds << " sd, " << defaults.x_count
        << " points; u step <= " << defaults.step.max_step << '\n'
        << report_table(report);

  write_file(cfg.out + ".csv", report_csv(report));
  write_file(cfg.out + ".txt", table.str());
  out << table.str() << "wrote " << cfg.out << ".csv and " << cfg.out << ".txt\n";

  for (const auto& r : report.rows)
    if (!r.failed())
      return ok;
  return all_cells_failed;
}

inline int
cmd_diagnose(const DiagnoseConfig& cfg, std::ostream& out)
{
  const TestLaw law = parse_law(cfg.law);
  groupdeconv::detail::require(cfg.group_size >= 1.0,
                               "group size must be >= 1 (got ", cfg.group_size, ")");
  groupdeconv::detail::require(cfg.n >= 2, "n must be >= 2 (got ", cfg.n, ")");
  groupdeconv::detail::require(cfg.eps > 0, "eps must be > 0 (got ", cfg.eps, ")");
  groupdeconv::detail::require(cfg.delta > 0, "delta must be > 0 (got ", cfg.delta, ")");
  groupdeconv::detail::require(cfg.u_count >= 2, "u count must be >= 2");

  const double gamma = risk_bound_gamma(cfg.group_size, cfg.delta);
  const double level = diagnostic_level(cfg.n, gamma, cfg.eps);

  std::ostringstream summary;
  summary << "# diagnostics for " << law.label() << "\n"
          << "law = " << law.label() << "\n"
          << "n = " << cfg.n << "\n"
          << "group_size = " << detail::fmt(cfg.group_size) << "\n"
          << "delta = " << detail::fmt(cfg.delta) << "\n"
          << "gamma = " << detail::fmt(gamma) << "  # sqrt(1 + 2/K + delta)\n"
          << "eps = " << detail::fmt(cfg.eps) << "\n"
          << "level = " << detail::fmt(level) << "  # (1 + eps) gamma (n / log n)^(-1/2)\n"
          << "c1 = " << detail::fmt((1 + cfg.eps) * std::log(1 + 1 / cfg.eps))
          << "  # (1 + eps) log(1 + 1/eps)\n";
  double u_n = 0.0;
  try {
    u_n = diagnostic_threshold_u(law, cfg.n, cfg.group_size, gamma, cfg.eps);
    summary << "u_n = " << detail::fmt(u_n) << "\n";
  } catch (const LevelNotReached& e) {
    summary << "u_n = nan\nwarning = " << e.what() << "\n";
  }

  const double threshold = adaptive_threshold(cfg.n, cfg.group_size, cfg.eta);
  summary << "eta = " << detail::fmt(cfg.eta) << "\n"
          << "adaptive_threshold = " << detail::fmt(threshold)
          << "  # (K n)^(-1/2) + sqrt(eta / K) sqrt(log n / n)\n"
          << "adaptive_cap = " << detail::fmt(adaptive_cap(cfg.n, cfg.group_size)) << "\n";

  const bool from_file = !cfg.input.empty();
  groupdeconv::detail::require(from_file || std::floor(cfg.group_size) == cfg.group_size,
                               "simulated samples need an integer group size (got ",
                               cfg.group_size, ")");
  const GroupedSample sample =
    from_file ? load_sample(cfg.input, cfg.group_size)
              : generate_grouped(law, cfg.n, static_cast<int>(std::lround(cfg.group_size)), cfg.seed);
  const auto m_hat = adaptive_cutoff(sample, cfg.eta);
  summary << "m_hat = " << detail::fmt(m_hat.value) << "  # "
          << (from_file ? "from " + cfg.input : "simulated sample, seed " + std::to_string(cfg.seed))
          << (m_hat.threshold_hit ? "" : ", capped") << "\n";

  const double u_max = cfg.u_max > 0 ? cfg.u_max : std::max({ 2.0 * u_n, 1.25 * m_hat.value, 1.0 });
  std::string profile = "u,abs_phi_x,abs_phi,abs_phi_hat\n";
  for (std::size_t i = 0; i < cfg.u_count; ++i) {
    const double u = u_max * static_cast<double>(i) / static_cast<double>(cfg.u_count - 1);
    const double phi_x = std::abs(law.cf(u));
    profile += detail::fmt(u) + ',' + detail::fmt(phi_x) + ',' +
               detail::fmt(std::pow(phi_x, cfg.group_size)) + ',' +
               detail::fmt(std::abs(ecf_at(sample, u))) + '\n';
  }

  write_file(cfg.out + ".txt", summary.str());
  write_file(cfg.out + "_profile.csv", profile);
  out << summary.str() << "wrote " << cfg.out << ".txt and " << cfg.out << "_profile.csv\n";
  return ok;
}

//! Entry point shared by the executable and the tests.
inline int
run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Density estimation from grouped observations", "groupdeconv" };
  app.require_subcommand(1);

  EstimateConfig est;
  auto* estimate = app.add_subcommand("estimate", "estimate the density of X from sums of K copies");
  estimate->add_option("--input", est.input, "observations, one per line")->required();
  estimate->add_option("--group-size,-K", est.group_size, "K (or a real Delta >= 1)")->required();
  estimate->add_option("--eta", est.eta, "adaptive threshold constant (> 1)")->capture_default_str();
  estimate->add_option("--cutoff", est.cutoff, "adaptive | oracle | fixed:<m>")->capture_default_str();
  estimate->add_option("--law", est.law, "true law for --cutoff oracle, e.g. normal or normal:2,1");
  estimate->add_option("--x-min", est.x_min);
  estimate->add_option("--x-max", est.x_max);
  estimate->add_option("--x-count", est.x_count)->capture_default_str();
  estimate->add_option("--scan-resolution", est.scan_resolution)->capture_default_str();
  estimate->add_flag("--clip", est.clip, "clip negative values and renormalize");
  estimate->add_option("--out", est.out, "output prefix")->capture_default_str();

  SimulateConfig sim;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo risk tables");
  simulate->add_option("--law", sim.laws, "law (repeatable); default: all four");
  simulate->add_option("--n", sim.ns, "sample size (repeatable)");
  simulate->add_option("--group-size,-K", sim.ks, "group size K (repeatable)");
  simulate->add_option("--reps", sim.reps, "replications per cell (default 500)");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--eta", sim.eta, "adaptive threshold constant (default 1.1)");
  simulate->add_option("--config", sim.config, "key = value scenario file");
  simulate->add_flag("--quick", sim.quick, "50 replications");
  simulate->add_option("--out", sim.out, "output prefix")->capture_default_str();

  DiagnoseConfig diag;
  auto* diagnose = app.add_subcommand("diagnose", "compare the adaptive cutoff with theory");
  diagnose->add_option("--law", diag.law, "test law")->required();
  diagnose->add_option("--n", diag.n)->capture_default_str();
  diagnose->add_option("--group-size,-K", diag.group_size)->capture_default_str();
  diagnose->add_option("--eps", diag.eps)->capture_default_str();
  diagnose->add_option("--delta", diag.delta)->capture_default_str();
  diagnose->add_option("--eta", diag.eta)->capture_default_str();
  diagnose->add_option("--input", diag.input, "observations; default: simulate from --law");
  diagnose->add_option("--seed", diag.seed)->capture_default_str();
  diagnose->add_option("--u-max", diag.u_max, "profile range (default from u_n and m_hat)");
  diagnose->add_option("--u-count", diag.u_count)->capture_default_str();
  diagnose->add_option("--out", diag.out, "output prefix")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  }

  try {
    if (*estimate)
      return cmd_estimate(est, out);
    if (*simulate)
      return cmd_simulate(sim, out);
    return cmd_diagnose(diag, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  } catch (const DenominatorTooSmall& e) {
    err << "numerical error: " << e.what() << "\n";
    return numerical_error;
  } catch (const CutoffExceedsRange& e) {
    err << "numerical error: " << e.what() << "\n";
    return numerical_error;
  }
}

} // namespace groupdeconv::cli
