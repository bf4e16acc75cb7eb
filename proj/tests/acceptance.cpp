// Acceptance harness: `acceptance N` checks criterion N (1-8) and prints one
// PASS/FAIL line; without arguments every criterion runs in turn.

#include "cli.hpp"
#include "groupdeconv/groupdeconv.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <tuple>
#include <sstream>
#include <string>

using namespace groupdeconv;
using C = std::complex<double>;

namespace {

struct Verdict
{
  bool pass;
  std::string detail;
};

std::string
fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Exact Gamma(shape, rate) cf and its derivative.
C
gamma_cf(double k, double r, double u)
{
  return std::exp(-k * std::log(C{ 1.0, -u / r }));
}
C
gamma_dcf(double k, double r, double u)
{
  return C{ 0.0, k / r } * std::exp(-(k + 1) * std::log(C{ 1.0, -u / r }));
}

Verdict
analytic_root()
{
  std::string detail;
  bool pass = true;
  for (double K : { 2.0, 3.0, 6.0 }) {
    auto phase_error = [&](double step, double* modulus_error) {
      const UGrid grid(5.0, step);
      const auto cf = CfEvaluation::from_functions(
        grid, [](double u) { return gamma_cf(6, 3, u); }, [](double u) { return gamma_dcf(6, 3, u); });
      const auto root = distinguished_root(cf, 5.0, K);
      double mod = 0, ph = 0;
      for (std::size_t k = 0; k < root.size(); ++k) {
        const double u = grid.at(k);
        const C truth = gamma_cf(6.0 / K, 3.0, u);
        mod = std::max(mod, std::abs(root.value(k) - truth));
        ph = std::max(ph, std::abs(root.phase[k] - (6.0 / K) * std::atan(u / 3.0)));
      }
      if (modulus_error)
        *modulus_error = mod;
      return ph;
    };
    double mod = 0;
    const double e1 = phase_error(1e-3, &mod);
    const double e2 = phase_error(5e-4, nullptr);
    const double ratio = e1 / e2;
    pass = pass && mod < 1e-6 && ratio >= 3.5 && ratio <= 4.5;
    detail += "K=" + fmt(K) + ": max err " + fmt(mod) + ", phase ratio " + fmt(ratio) + "; ";
  }
  return { pass, detail };
}

Verdict
unit_group_reduction()
{
  double worst = 0;
  Engine rng = make_engine(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto law = TestLaw::study_laws()[trial % 4];
    const auto sample = generate_grouped(law, 1000, 1, rng());
    const double m = 0.5 + 0.25 * (trial % 8);
    const UGrid grid(m, grid_step(m));
    const auto root = distinguished_root(evaluate_grid(sample, grid), m, 1.0);
    const XGrid xg = default_xgrid(sample, 8.0, 256);
    const auto est = invert(root, m, xg);
    std::vector<C> phi(grid.half() + 1);
    for (std::size_t k = 0; k <= grid.half(); ++k)
      phi[k] = ecf_at(sample, grid.at(k));
    for (std::size_t i = 0; i < xg.count; ++i) {
      const double x = xg.at(i);
      // direct trapezoid of Re exp(-iux) phi_hat(u) / pi on the same nodes
      double sum = 0;
      for (std::size_t k = 0; k <= grid.half(); ++k) {
        const double w = (k == 0 || k == grid.half()) ? 0.5 : 1.0;
        sum += w * (std::polar(1.0, -grid.at(k) * x) * phi[k]).real();
      }
      worst = std::max(worst, std::abs(sum * grid.step() / std::numbers::pi - est.values[i]));
    }
  }
  return { worst < 1e-8, "sup-norm gap " + fmt(worst) + " over 20 samples" };
}

Verdict
plancherel()
{
  double worst = 0;
  std::string where;
  int within = 0, total = 0;
  double edge_at_worst = 0;
  const auto grid = ScenarioGrid::study();
  for (const auto& law : grid.laws)
    for (auto n : grid.ns)
      for (auto K : grid.ks) {
        const auto sample = generate_grouped(law, n, K, replication_seed(grid.master_seed, law, n, K, 0));
        const double m = adaptive_cutoff(sample, grid.eta).value;
        const UGrid ugrid(m, grid_step(m));
        const auto root = distinguished_root(evaluate_grid(sample, ugrid), m, K);
        const double sd = std::sqrt(sample.variance() / K);
        const double half = 12.0 * sd;
        // x spacing well inside the Nyquist limit pi / m
        const auto count = static_cast<std::size_t>(std::max(4096.0, std::ceil(2 * half * m / 0.05)));
        const auto xg = XGrid::centered(sample.mean() / K, half, count);
        const auto est = invert(root, m, xg);
        std::vector<double> sq(xg.count);
        for (std::size_t i = 0; i < xg.count; ++i)
          sq[i] = est.values[i] * est.values[i];
        const double x_side = integrate(sq, xg);
        const double u_side = spectral_energy(root, m);
        const double rel = std::abs(x_side - u_side) / u_side;
        ++total;
        within += rel < 1e-4;
        if (rel > worst) {
          worst = rel;
          edge_at_worst = root.modulus_pow.back();
          where = law.label() + " n=" + std::to_string(n) + " K=" + std::to_string(K);
        }
      }
  return { worst < 1e-4, std::to_string(within) + " of " + std::to_string(total) +
                           " scenarios within 1e-4; worst relative gap " + fmt(worst) + " at " + where +
                           " (|phi_hat_X(m)| = " + fmt(edge_at_worst) + ")" };
}

Verdict
table_cells()
{
  struct Cell
  {
    TestLaw law;
    std::size_t n;
    double risk, oracle;
  };
  const auto laws = TestLaw::study_laws();
  const std::vector<Cell> cells{ { laws[0], 10000, 0.018, 0.007 },
                                 { laws[1], 1000, 0.037, 0.017 },
                                 { laws[2], 1000, 0.050, 0.021 },
                                 { laws[3], 1000, 0.152, 0.070 } };
  bool pass = true;
  std::string detail;
  for (const auto& c : cells) {
    ScenarioGrid g{ { c.law }, { c.n }, { 5 }, 500, 1.1, ScenarioGrid::study().master_seed };
    const auto report = run_grid(g);
    const auto* a = report.find(c.law, c.n, 5, Method::adaptive);
    const auto* o = report.find(c.law, c.n, 5, Method::oracle);
    const bool ok = a && o && !a->failed() && !o->failed() &&
                    std::abs(a->mean_risk - c.risk) <= 0.5 * c.risk &&
                    std::abs(o->mean_risk - c.oracle) <= 0.5 * c.oracle;
    pass = pass && ok;
    detail += c.law.name() + ": r=" + (a ? fmt(a->mean_risk) : "?") + " (" + fmt(c.risk) +
              ") r_or=" + (o ? fmt(o->mean_risk) : "?") + " (" + fmt(c.oracle) + "); ";
  }
  return { pass, detail };
}

Verdict
trends()
{
  auto grid = ScenarioGrid::study();
  grid.replications = 200;
  const auto report = run_grid(grid);
  int comparisons = 0, inverted = 0;
  std::string which;
  auto compare = [&](const RiskRow* lo, const RiskRow* hi) {
    ++comparisons;
    if (!lo || !hi || lo->failed() || hi->failed() || !(lo->mean_risk < hi->mean_risk)) {
      ++inverted;
      if (lo && hi)
        which += " [" + lo->law.label() + " " + to_string(lo->method) + " n=" + std::to_string(lo->n) +
                 " K=" + std::to_string(lo->K) + " vs n=" + std::to_string(hi->n) +
                 " K=" + std::to_string(hi->K) + "]";
    }
  };
  for (const auto& law : grid.laws)
    for (Method method : { Method::oracle, Method::adaptive }) {
      // increasing in K at fixed n
      for (auto n : grid.ns)
        for (std::size_t k = 0; k + 1 < grid.ks.size(); ++k)
          compare(report.find(law, n, grid.ks[k], method), report.find(law, n, grid.ks[k + 1], method));
      // decreasing from the smallest to the largest n at fixed K
      for (auto K : grid.ks)
        compare(report.find(law, grid.ns.back(), K, method), report.find(law, grid.ns.front(), K, method));
    }
  return { inverted <= 2,
           std::to_string(inverted) + " of " + std::to_string(comparisons) + " comparisons inverted" + which };
}

Verdict
oracle_dominance()
{
  const auto grid = ScenarioGrid::study();
  std::vector<std::tuple<TestLaw, std::size_t, int>> cells;
  for (const auto& law : grid.laws)
    for (auto n : grid.ns)
      for (auto K : grid.ks)
        cells.emplace_back(law, n, K);
  const std::size_t total = 1000;
  std::vector<int> ok(total, 0);
  std::vector<double> excess(total, 0.0);
  parallel_for(total, default_thread_count(), [&](std::size_t i) {
    const auto& [law, n, K] = cells[i % cells.size()];
    try {
      const auto r = run_replication(law, n, K, grid.eta, derive_seed(99, i));
      excess[i] = r.risk_oracle - r.risk_adaptive;
      ok[i] = excess[i] <= 1e-6;
    } catch (const std::exception&) {
      ok[i] = 0;
      excess[i] = NAN;
    }
  });
  std::size_t good = 0;
  double worst = -INFINITY;
  for (std::size_t i = 0; i < total; ++i) {
    good += ok[i];
    worst = std::max(worst, excess[i]);
  }
  return { good == total,
           std::to_string(good) + " of " + std::to_string(total) + " replications; max(r_or - r) = " + fmt(worst) };
}

Verdict
adaptive_invariants()
{
  bool capped = true, monotone = true;
  const auto grid = ScenarioGrid::study();
  Engine rng = make_engine(7);
  int samples = 0;
  for (const auto& law : grid.laws)
    for (auto n : grid.ns)
      for (auto K : grid.ks) {
        const auto s = generate_grouped(law, n, K, rng());
        const auto rec = adaptive_cutoff(s, grid.eta);
        capped = capped && rec.value <= std::pow(static_cast<double>(n), 1.0 / K) * (1 + 1e-12);
        ++samples;
      }
  for (int trial = 0; trial < 50; ++trial) {
    const auto law = grid.laws[trial % 4];
    const auto s = generate_grouped(law, grid.ns[trial % 3], grid.ks[(trial / 4) % 4], rng());
    double prev = INFINITY;
    for (double eta : { 1.01, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0 }) {
      const auto rec = adaptive_cutoff(s, eta);
      capped = capped && rec.value <= rec.cap;
      monotone = monotone && rec.value <= prev + rec.scan_resolution;
      prev = rec.value;
    }
  }
  const GroupedSample constant(std::vector<double>(1000, 2.5), 5.0);
  const auto rec = adaptive_cutoff(constant, 1.1);
  const bool degenerate = !rec.threshold_hit && std::abs(rec.value - std::pow(1000.0, 1.0 / 5.0)) < 1e-12;
  return { capped && monotone && degenerate,
           std::string("cap respected: ") + (capped ? "yes" : "no") + " (" + std::to_string(samples + 50) +
             " samples); monotone in eta: " + (monotone ? "yes" : "no") +
             "; constant sample -> " + fmt(rec.value) };
}

std::string
slurp(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict
determinism()
{
  auto simulate = [](const std::string& threads, const std::string& tag) {
    ::setenv("GROUPDECONV_THREADS", threads.c_str(), 1);
    const std::string out = std::string(GROUPDECONV_TEST_TMP) + "/acceptance_det_" + tag;
    const char* argv[] = { "groupdeconv", "simulate", "--law", "gumbel", "--law", "laplace", "--n", "1000",
                           "-K",          "5",        "-K",    "10",     "--reps", "20",     "--seed", "4242",
                           "--out",       out.c_str() };
    std::ostringstream sink;
    const int code = cli::run(static_cast<int>(std::size(argv)), argv, sink, sink);
    return code == 0 ? slurp(out + ".csv") : std::string("exit ") + std::to_string(code);
  };
  const auto a = simulate("1", "a");
  const auto b = simulate("1", "b");
  const auto c = simulate("4", "c");
  const auto d = simulate("4", "d");
  ::unsetenv("GROUPDECONV_THREADS");
  const bool pass = a.rfind("law,", 0) == 0 && a == b && a == c && a == d;
  return { pass, std::string("repeat: ") + (a == b ? "identical" : "differs") +
                   ", threads 1 vs 4: " + (a == c && c == d ? "identical" : "differs") +
                   " (" + std::to_string(a.size()) + " bytes)" };
}

} // namespace

int
main(int argc, char** argv)
{
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
    { "analytic root", analytic_root },     { "K = 1 reduction", unit_group_reduction },
    { "Plancherel", plancherel },           { "table cells", table_cells },
    { "trends", trends },                   { "oracle dominance", oracle_dominance },
    { "adaptive invariants", adaptive_invariants }, { "determinism", determinism }
  };
  std::vector<int> which;
  for (int i = 1; i < argc; ++i)
    which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 8; ++i)
      which.push_back(i);

  int failures = 0;
  for (int c : which) {
    if (c < 1 || c > 8) {
      std::cerr << "unknown criterion " << c << "\n";
      return 2;
    }
    const auto& [name, check] = criteria[c - 1];
    const auto start = std::chrono::steady_clock::now();
    Verdict v{ false, "" };
    try {
      v = check();
    } catch (const std::exception& e) {
      v = { false, std::string("exception: ") + e.what() };
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << c << " (" << name << "): " << (v.pass ? "PASS" : "FAIL") << " - "
              << v.detail << " [" << fmt(secs) << " s]" << std::endl;
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
