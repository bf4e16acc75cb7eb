#pragma once

#include "charfn.hpp"
#include "cutoff.hpp"
#include "errors.hpp"
#include "inversion.hpp"
#include "rootlog.hpp"
#include "samples.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace groupdeconv {

//! Frequency-grid resolution used to build roots up to a cutoff m.
struct StepPolicy
{
  double max_step = 0.01;
  //! minimum number of grid intervals in [0, m]
  double min_intervals = 4096;
};

//! Largest step not above min(max_step, m / min_intervals) that puts m on a
//! grid node.
inline double
grid_step(double m, const StepPolicy& policy = {})
{
  detail::require(std::isfinite(m) && m > 0, "cutoff must be > 0 (got ", m, ")");
  const double intervals =
    std::ceil(std::max(m / policy.max_step, policy.min_intervals) * (1.0 - 1e-12));
  return m / std::max(intervals, 1.0);
}

//! Modulus level of the data-driven cutoff:
//! (K n)^(-1/2) + sqrt(eta / K) * sqrt(log n / n).
inline double
adaptive_threshold(std::size_t n, double group_size, double eta)
{
  const double nn = static_cast<double>(n);
  return 1.0 / std::sqrt(group_size * nn) +
         std::sqrt(eta / group_size) * std::sqrt(std::log(nn) / nn);
}

struct AdaptiveOptions
{
  double scan_resolution = 0.01;
  //! bisection tolerance on the crossing
  double tolerance = 1e-6;
  //! replaces the cap n^(1/K) when K = 1
  double unit_group_cap = 1e3;
};

inline double
adaptive_cap(std::size_t n, double group_size, const AdaptiveOptions& options = {})
{
  if (group_size == 1.0)
    return options.unit_group_cap;
  return std::pow(static_cast<double>(n), 1.0 / group_size);
}

//! Data-driven cutoff: first u with |phi_hat(u)| <= threshold, located by a
//! scan at scan_resolution and refined by bisection; capped at n^(1/K).
inline CutoffRecord
adaptive_cutoff(const GroupedSample& sample, double eta, AdaptiveOptions options = {})
{
  detail::require(std::isfinite(eta) && eta > 1.0, "eta must be > 1 (got ", eta, ")");
  detail::require(std::isfinite(options.scan_resolution) && options.scan_resolution > 0,
                  "scan resolution must be > 0 (got ", options.scan_resolution, ")");
  const std::size_t n = sample.size();
  const double k = sample.group_size();
  const double t = adaptive_threshold(n, k, eta);
  const double cap = adaptive_cap(n, k, options);
  const double r = options.scan_resolution;

  CutoffRecord rec;
  rec.rule = CutoffRule::adaptive;
  rec.eta = eta;
  rec.threshold = t;
  rec.cap = cap;
  rec.scan_resolution = r;

  if (t >= 1.0) {
    // |phi_hat(0)| = 1 already qualifies; report the smallest positive cutoff.
    rec.value = std::min(r, cap);
    rec.threshold_hit = true;
    return rec;
  }

  auto bisect = [&](double lo, double hi) {
    while (hi - lo > options.tolerance) {
      const double mid = 0.5 * (lo + hi);
      if (std::abs(ecf_at(sample, mid)) <= t)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  };

  EcfStepper stepper(sample, r);
  stepper.next(); // u = 0
  for (;;) {
    const double u = stepper.u();
    const double prev = u - r;
    if (u >= cap) {
      if (std::abs(ecf_at(sample, cap)) <= t) {
        rec.value = bisect(prev, cap);
        rec.threshold_hit = true;
      } else {
        rec.value = cap;
        rec.threshold_hit = false;
      }
      return rec;
    }
    if (std::abs(stepper.next().first) <= t) {
      rec.value = bisect(prev, u);
      rec.threshold_hit = true;
      return rec;
    }
  }
}

//! `count` log-spaced cutoffs from `lo` to `hi`. If hi <= lo the range
//! becomes [hi / 16, hi].
inline std::vector<double>
log_spaced(double lo, double hi, std::size_t count)
{
  detail::require(hi > 0 && std::isfinite(hi), "upper cutoff must be > 0");
  detail::require(count >= 1, "need at least one cutoff");
  if (hi <= lo)
    lo = hi / 16.0;
  std::vector<double> ms(count);
  if (count == 1) {
    ms[0] = hi;
    return ms;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    ms[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  ms.back() = hi;
  return ms;
}

//! Default oracle cutoff candidates: 60 log-spaced points from 0.25 to hi.
inline std::vector<double>
default_m_grid(double hi)
{
  return log_spaced(0.25, hi, 60);
}

struct OracleSelection
{
  CutoffRecord cutoff;
  double risk = 0.0;
  //! candidates that were feasible, and their L2 risks
  std::vector<double> m_grid;
  std::vector<double> risks;
  //! index of the argmin in m_grid
  std::size_t best = 0;
  std::vector<RootWarning> warnings;
};

//! argmin over m_grid of ||f - f_hat_m||^2 for a shared root. Candidates past
//! the root range are dropped with a warning; ties go to the smaller m.
template<typename Density>
OracleSelection
select_oracle(const Density& density,
              const RootEstimate& root,
              std::vector<double> m_grid,
              const XGrid& xgrid)
{
  detail::require(!m_grid.empty(), "oracle m grid is empty");
  detail::require(std::is_sorted(m_grid.begin(), m_grid.end()),
                  "oracle m grid must be sorted");
  detail::require(m_grid.front() > 0, "oracle m grid must be positive");

  OracleSelection sel;
  sel.warnings = root.warnings;
  const double limit = root.u_limit() * (1.0 + 1e-12);
  const auto feasible_end =
    std::upper_bound(m_grid.begin(), m_grid.end(), limit);
  if (feasible_end != m_grid.end()) {
    sel.warnings.push_back(
      { *feasible_end,
        detail::concat("oracle grid truncated at root range ", root.u_limit()) });
    m_grid.erase(feasible_end, m_grid.end());
  }
  if (m_grid.empty())
    throw CutoffExceedsRange(detail::concat("no oracle cutoff within root range ",
                                            root.u_limit()));

  std::vector<double> truth(xgrid.count);
  for (std::size_t i = 0; i < xgrid.count; ++i)
    truth[i] = density(xgrid.at(i));
  const auto w = detail::trapezoid_weights(xgrid);

  const auto rows = invert_many(root, m_grid, xgrid);
  sel.risks.resize(m_grid.size());
  for (std::size_t j = 0; j < m_grid.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < xgrid.count; ++i) {
      const double d = rows[j][i] - truth[i];
      s += w[i] * d * d;
    }
    sel.risks[j] = s;
    if (s < sel.risks[sel.best])
      sel.best = j;
  }
  sel.m_grid = std::move(m_grid);
  sel.risk = sel.risks[sel.best];
  sel.cutoff.value = sel.m_grid[sel.best];
  sel.cutoff.rule = CutoffRule::oracle;
  sel.cutoff.threshold_hit = false;
  return sel;
}

//! Oracle cutoff for a sample from a known law: builds one root up to
//! max(m_grid), truncating at the denominator floor, and minimizes the L2
//! distance to the exact density over m_grid.
inline OracleSelection
oracle_cutoff(const TestLaw& law,
              const GroupedSample& sample,
              const std::vector<double>& m_grid,
              const XGrid& xgrid,
              const StepPolicy& policy = {})
{
  detail::require(!m_grid.empty(), "oracle m grid is empty");
  const double hi = *std::max_element(m_grid.begin(), m_grid.end());
  const UGrid grid(hi, grid_step(hi, policy));
  const auto cf = evaluate_grid(sample, grid);
  const auto root =
    distinguished_root(cf, grid.u_max(), sample.group_size(), { .truncate_at_floor = true });
  return select_oracle([&law](double x) { return law.density(x); }, root, m_grid, xgrid);
}

//! sqrt(1 + 2/K + delta)
inline double
risk_bound_gamma(double group_size, double delta = 0.1)
{
  return std::sqrt(1.0 + 2.0 / group_size + delta);
}

//! (1 + eps) * gamma * (n / log n)^(-1/2)
inline double
diagnostic_level(std::size_t n, double gamma, double eps)
{
  const double nn = static_cast<double>(n);
  return (1.0 + eps) * gamma * std::sqrt(std::log(nn) / nn);
}

//! First u >= 0 where |phi_X(u)|^K falls to the diagnostic level, by scan
//! (step 0.01 up to u = 10, then 0.1% of u) and bisection.
inline double
diagnostic_threshold_u(const TestLaw& law,
                       std::size_t n,
                       double group_size,
                       double gamma,
                       double eps,
                       double tolerance = 1e-9)
{
  detail::require(n >= 2, "n must be >= 2 (got ", n, ")");
  detail::require(group_size >= 1, "group size must be >= 1 (got ", group_size, ")");
  detail::require(gamma > 0 && eps > 0, "gamma and eps must be > 0");
  const double level = diagnostic_level(n, gamma, eps);
  if (level >= 1.0)
    return 0.0;
  auto modulus = [&](double u) { return std::pow(std::abs(law.cf(u)), group_size); };
  constexpr double u_stop = 1e6;
  double prev = 0.0;
  while (prev < u_stop) {
    const double step = prev < 10.0 ? 0.01 : 1e-3 * prev;
    const double u = prev + step;
    if (modulus(u) <= level) {
      double lo = prev, hi = u;
      while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (modulus(mid) <= level)
          hi = mid;
        else
          lo = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = u;
  }
  throw LevelNotReached(detail::concat("|phi_X|^K stays above ", level,
                                       " for u <= ", u_stop, " (", law.label(), ")"));
}

} // namespace groupdeconv
