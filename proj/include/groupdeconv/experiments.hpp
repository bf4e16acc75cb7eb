#pragma once

#include "bandwidth.hpp"
#include "charfn.hpp"
#include "errors.hpp"
#include "inversion.hpp"
#include "rng.hpp"
#include "rootlog.hpp"
#include "samples.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace groupdeconv {

struct ScenarioGrid
{
  std::vector<TestLaw> laws;
  std::vector<std::size_t> ns;
  std::vector<int> ks;
  std::size_t replications = 500;
  double eta = 1.1;
  std::uint64_t master_seed = 20160101;

  //! 4 laws x n in {1000, 5000, 10000} x K in {5, 10, 20, 50}.
  static ScenarioGrid study()
  {
    return { TestLaw::study_laws(), { 1000, 5000, 10000 }, { 5, 10, 20, 50 }, 500, 1.1,
             20160101 };
  }

  void validate() const
  {
    detail::require(!laws.empty() && !ns.empty() && !ks.empty(),
                    "scenario grid needs at least one law, n and K");
    detail::require(replications >= 1, "replications must be >= 1");
    detail::require(std::isfinite(eta) && eta > 1.0, "eta must be > 1 (got ", eta, ")");
    for (auto n : ns)
      detail::require(n >= 2, "every n must be >= 2 (got ", n, ")");
    for (auto k : ks)
      detail::require(k >= 1, "every K must be >= 1 (got ", k, ")");
  }
};

//! Numerical settings shared by both estimators within a replication.
struct ReplicationOptions
{
  //! Root grid: m_hat lands on a node, step <= 0.01.
  StepPolicy step{ 0.01, 128 };
  AdaptiveOptions adaptive{};
  //! x grid: law mean +- sds * law sd
  double x_sds = 8.0;
  std::size_t x_count = 1024;
  std::size_t oracle_points = 60;
  double oracle_lo = 0.25;
};

struct ReplicationResult
{
  double risk_adaptive = 0.0;
  double risk_oracle = 0.0;
  double m_adaptive = 0.0;
  double m_oracle = 0.0;
  bool threshold_hit = false;
};

//! One Monte-Carlo replication: a single grouped sample, both estimators on the
//! same root and x grid, L2 risks against the exact density. The adaptive
//! cutoff is one of the oracle candidates, so risk_oracle <= risk_adaptive.
inline ReplicationResult
run_replication(const TestLaw& law,
                std::size_t n,
                int K,
                double eta,
                std::uint64_t seed,
                const ReplicationOptions& options = {})
{
  const auto sample = generate_grouped(law, n, K, seed);
  const auto adaptive = adaptive_cutoff(sample, eta, options.adaptive);
  const double m_hat = adaptive.value;

  const double step = grid_step(m_hat, options.step);
  const double reach = std::max(m_hat, adaptive.cap);
  const UGrid grid(std::ceil(reach / step * (1.0 - 1e-12)) * step, step);
  const auto cf = evaluate_grid(sample, grid);
  const auto root = distinguished_root(cf, grid.u_max(), static_cast<double>(K),
                                       { .truncate_at_floor = true });
  if (root.u_limit() < m_hat * (1.0 - 1e-12))
    throw DenominatorTooSmall(root.grid.at(root.size()), 0.0, denominator_floor(n));

  auto m_grid = log_spaced(options.oracle_lo, root.u_limit(), options.oracle_points);
  m_grid.push_back(m_hat);
  std::sort(m_grid.begin(), m_grid.end());
  m_grid.erase(std::unique(m_grid.begin(), m_grid.end()), m_grid.end());
  const auto adaptive_index = static_cast<std::size_t>(
    std::lower_bound(m_grid.begin(), m_grid.end(), m_hat) - m_grid.begin());

  const XGrid xgrid = law_xgrid(law, options.x_sds, options.x_count);
  const auto sel =
    select_oracle([&law](double x) { return law.density(x); }, root, m_grid, xgrid);

  ReplicationResult r;
  r.m_adaptive = m_hat;
  r.threshold_hit = adaptive.threshold_hit;
  r.risk_adaptive = sel.risks.at(adaptive_index);
  r.risk_oracle = sel.risk;
  r.m_oracle = sel.cutoff.value;
  return r;
}

enum class Method
{
  oracle,
  adaptive
};

inline std::string
to_string(Method m)
{
  return m == Method::oracle ? "oracle" : "adaptive";
}

struct RiskRow
{
  TestLaw law;
  std::size_t n;
  int K;
  Method method;
  double mean_risk;
  double std_error;
  std::size_t replications;
  double mean_cutoff;
  //! replications that raised an error
  std::size_t failures = 0;
  std::string first_error;

  bool failed() const noexcept { return replications == 0; }
};

struct RiskReport
{
  ScenarioGrid grid;
  std::vector<RiskRow> rows;

  const RiskRow* find(const TestLaw& law, std::size_t n, int K, Method m) const
  {
    for (const auto& r : rows)
      if (r.law == law && r.n == n && r.K == K && r.method == m)
        return &r;
    return nullptr;
  }
};

//! Worker count: GROUPDECONV_THREADS when set to a positive integer, otherwise
//! the hardware concurrency.
inline unsigned
default_thread_count()
{
  if (const char* env = std::getenv("GROUPDECONV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0)
      return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

//! Runs task(i) for i in [0, count) on up to `threads` workers. Exceptions
//! escaping a task terminate; tasks report their own failures.
template<typename Task>
void
parallel_for(std::size_t count, unsigned threads, Task&& task)
{
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      task(i);
    return;
  }
  std::atomic<std::size_t> next{ 0 };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++)
        task(i);
    });
}

namespace detail {

//! FNV-1a; keeps cell seeds independent of grid composition.
inline std::uint64_t
fnv1a(const std::string& s)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace detail

//! Seed of replication `rep` of cell (law, n, K).
inline std::uint64_t
replication_seed(std::uint64_t master, const TestLaw& law, std::size_t n, int K, std::size_t rep)
{
  const std::uint64_t cell =
    derive_seed(detail::fnv1a(law.label()), n, static_cast<std::uint64_t>(K));
  return derive_seed(master, cell, rep);
}

struct RunOptions
{
  unsigned threads = 0; // 0: default_thread_count()
  ReplicationOptions replication{};
};

//! Every (law, n, K) cell of the grid, replications reduced in index order.
inline RiskReport
run_grid(const ScenarioGrid& grid, const RunOptions& options = {})
{
  grid.validate();
  struct Cell
  {
    TestLaw law;
    std::size_t n;
    int K;
  };
  std::vector<Cell> cells;
  for (const auto& law : grid.laws)
    for (auto n : grid.ns)
      for (auto K : grid.ks)
        cells.push_back({ law, n, K });

  const std::size_t reps = grid.replications;
  struct Outcome
  {
    std::optional<ReplicationResult> result;
    std::string error;
  };
  std::vector<Outcome> outcomes(cells.size() * reps);
  const unsigned threads = options.threads ? options.threads : default_thread_count();

  parallel_for(outcomes.size(), threads, [&](std::size_t i) {
    const Cell& c = cells[i / reps];
    const std::size_t rep = i % reps;
    try {
      outcomes[i].result =
        run_replication(c.law, c.n, c.K, grid.eta,
                        replication_seed(grid.master_seed, c.law, c.n, c.K, rep),
                        options.replication);
    } catch (const std::exception& e) {
      outcomes[i].error = detail::concat(c.law.label(), " n=", c.n, " K=", c.K,
                                         " rep=", rep, ": ", e.what());
    }
  });

  RiskReport report{ grid, {} };
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& c = cells[ci];
    for (Method method : { Method::oracle, Method::adaptive }) {
      double sum = 0, sum_sq = 0, sum_m = 0;
      std::size_t ok = 0, failures = 0;
      std::string first_error;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const auto& o = outcomes[ci * reps + rep];
        if (!o.result) {
          ++failures;
          if (first_error.empty())
            first_error = o.error;
          continue;
        }
        const double risk =
          method == Method::oracle ? o.result->risk_oracle : o.result->risk_adaptive;
        const double m =
          method == Method::oracle ? o.result->m_oracle : o.result->m_adaptive;
        sum += risk;
        sum_sq += risk * risk;
        sum_m += m;
        ++ok;
      }
      RiskRow row{ c.law, c.n, c.K, method, std::nan(""), std::nan(""), ok, std::nan(""),
                   failures, first_error };
      if (ok > 0) {
        const double k = static_cast<double>(ok);
        row.mean_risk = sum / k;
        row.mean_cutoff = sum_m / k;
        const double var = ok > 1 ? std::max(0.0, (sum_sq - k * row.mean_risk * row.mean_risk) / (k - 1)) : 0.0;
        row.std_error = std::sqrt(var / k);
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

namespace detail {

inline std::string
format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

//! RFC 4180 quoting when needed.
inline std::string
csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\n\r") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

} // namespace detail

//! law,n,K,method,mean_risk,std_error,reps,mean_cutoff; failed rows carry
//! reps = 0 and nan statistics.
inline std::string
report_csv(const RiskReport& report)
{
  std::string out = "law,n,K,method,mean_risk,std_error,reps,mean_cutoff\n";
  for (const auto& r : report.rows) {
    out += detail::csv_field(r.law.label());
    out += ',' + std::to_string(r.n);
    out += ',' + std::to_string(r.K);
    out += ',' + to_string(r.method);
    out += ',' + detail::format_number(r.mean_risk);
    out += ',' + detail::format_number(r.std_error);
    out += ',' + std::to_string(r.replications);
    out += ',' + detail::format_number(r.mean_cutoff);
    out += '\n';
  }
  return out;
}

//! Aligned text table: one block per law pair, rows (n, K), columns r_or and r.
inline std::string
report_table(const RiskReport& report)
{
  std::ostringstream os;
  const auto& g = report.grid;
  os << "# replications=" << g.replications << " eta=" << g.eta
     << " seed=" << g.master_seed << '\n';
  auto cell = [](const RiskRow* r) {
    std::ostringstream c;
    if (!r || r->failed())
      c << std::setw(9) << "FAILED";
    else {
      c << std::setw(9) << std::fixed << std::setprecision(3) << r->mean_risk;
      if (r->failures > 0)
        c << '*';
    }
    return c.str();
  };
  for (std::size_t first = 0; first < g.laws.size(); first += 2) {
    const std::size_t last = std::min(first + 2, g.laws.size());
    os << '\n' << std::setw(7) << "n" << std::setw(5) << "K" << " |";
    for (std::size_t l = first; l < last; ++l)
      os << ' ' << std::setw(19) << std::left << g.laws[l].label() << std::right << " |";
    os << '\n' << std::setw(7) << "" << std::setw(5) << "" << " |";
    for (std::size_t l = first; l < last; ++l)
      os << std::setw(9) << "r_or" << ' ' << std::setw(9) << "r" << " |";
    os << '\n';
    for (auto n : g.ns)
      for (auto K : g.ks) {
        os << std::setw(7) << n << std::setw(5) << K << " |";
        for (std::size_t l = first; l < last; ++l)
          os << cell(report.find(g.laws[l], n, K, Method::oracle)) << ' '
             << cell(report.find(g.laws[l], n, K, Method::adaptive)) << " |";
        os << '\n';
      }
  }
  bool any_failure = false;
  for (const auto& r : report.rows)
    if (r.failures > 0) {
      if (!any_failure)
        os << "\n# failures\n";
      any_failure = true;
      os << "# " << r.law.label() << " n=" << r.n << " K=" << r.K << ' '
         << to_string(r.method) << ": " << r.failures << " of "
         << r.failures + r.replications << " replications failed; first: "
         << r.first_error << '\n';
    }
  return os.str();
}

} // namespace groupdeconv
