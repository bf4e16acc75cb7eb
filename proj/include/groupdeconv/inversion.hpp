#pragma once

#include "cutoff.hpp"
#include "errors.hpp"
#include "rootlog.hpp"
#include "samples.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace groupdeconv {

//! count uniformly spaced points from x_min to x_max inclusive.
struct XGrid
{
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t count = 1024;

  XGrid() = default;
  XGrid(double lo, double hi, std::size_t n)
    : x_min(lo)
    , x_max(hi)
    , count(n)
  {
    detail::require(std::isfinite(lo) && std::isfinite(hi) && lo < hi,
                    "x grid needs x_min < x_max (got ", lo, ", ", hi, ")");
    detail::require(n >= 16, "x grid needs at least 16 points (got ", n, ")");
  }

  double spacing() const noexcept
  {
    return (x_max - x_min) / static_cast<double>(count - 1);
  }
  double at(std::size_t i) const noexcept
  {
    return i + 1 == count ? x_max : x_min + static_cast<double>(i) * spacing();
  }

  static XGrid centered(double center, double half_width, std::size_t count)
  {
    return XGrid(center - half_width, center + half_width, count);
  }

  friend bool operator==(const XGrid&, const XGrid&) = default;
};

//! Center mean(Y)/K, half-width `sds` times sqrt(var(Y)/K).
inline XGrid
default_xgrid(const GroupedSample& sample, double sds = 8.0, std::size_t count = 1024)
{
  const double k = sample.group_size();
  double sd = std::sqrt(sample.variance() / k);
  if (!(sd > 0))
    sd = 1.0;
  return XGrid::centered(sample.mean() / k, sds * sd, count);
}

//! Same policy from the exact mean and variance of a test law.
inline XGrid
law_xgrid(const TestLaw& law, double sds = 8.0, std::size_t count = 1024)
{
  return XGrid::centered(law.mean(), sds * std::sqrt(law.variance()), count);
}

struct Provenance
{
  std::size_t n = 0;
  std::string source;
};

struct DensityEstimate
{
  XGrid xgrid;
  std::vector<double> values;
  CutoffRecord cutoff;
  double group_size = 1.0;
  Provenance provenance;

  //! Linear interpolation; zero outside the grid.
  double operator()(double x) const
  {
    if (x < xgrid.x_min || x > xgrid.x_max)
      return 0.0;
    const double pos = (x - xgrid.x_min) / xgrid.spacing();
    const auto i = std::min(static_cast<std::size_t>(pos), xgrid.count - 2);
    const double t = pos - static_cast<double>(i);
    return (1.0 - t) * values[i] + t * values[i + 1];
  }
};

namespace detail {

inline std::vector<double>
trapezoid_weights(const XGrid& g)
{
  std::vector<double> w(g.count, g.spacing());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

} // namespace detail

inline double
integrate(std::span<const double> values, const XGrid& grid)
{
  const auto w = detail::trapezoid_weights(grid);
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    s += w[i] * values[i];
  return s;
}

//! f_m(x) = (1/pi) Re int_0^m exp(-iux) phi_X(u) du for several cutoffs at once,
//! by trapezoid on the root grid. A cutoff between grid points closes with a
//! partial trapezoid using linear interpolation of phi_X. Each returned row
//! matches a single-cutoff call bit for bit.
inline std::vector<std::vector<double>>
invert_many(const RootEstimate& root, std::span<const double> cutoffs, const XGrid& xgrid)
{
  constexpr std::size_t resync = 512;
  const double h = root.grid.step();
  const double limit = root.u_limit();

  struct Stop
  {
    std::size_t node;   // last full node
    double delta;       // remaining partial length
    std::complex<double> end_value; // phi_X at the cutoff
    double m;
  };
  std::vector<Stop> stops;
  stops.reserve(cutoffs.size());
  std::size_t last_node = 0;
  for (double m : cutoffs) {
    detail::require(std::isfinite(m) && m > 0, "cutoff must be > 0 (got ", m, ")");
    if (m > limit * (1.0 + 1e-12))
      throw CutoffExceedsRange(detail::concat("cutoff ", m,
                                              " exceeds root range ", limit));
    std::size_t node = root.grid.count_upto(m) - 1;
    node = std::min(node, root.size() - 1);
    double delta = m - root.grid.at(node);
    if (delta <= 1e-12 * std::max(1.0, m))
      delta = 0.0;
    std::complex<double> end{};
    if (delta > 0.0) {
      const double t = delta / h;
      end = (1.0 - t) * root.value(node) + t * root.value(node + 1);
    }
    stops.push_back({ node, delta, end, m });
    last_node = std::max(last_node, node);
  }

  std::vector<std::complex<double>> phi_x(last_node + 1);
  for (std::size_t k = 0; k <= last_node; ++k)
    phi_x[k] = root.value(k);

  std::vector<std::vector<double>> out(cutoffs.size(),
                                       std::vector<double>(xgrid.count));
  // order of stops along u
  std::vector<std::size_t> order(stops.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return stops[a].node < stops[b].node;
  });

  for (std::size_t ix = 0; ix < xgrid.count; ++ix) {
    const double x = xgrid.at(ix);
    const std::complex<double> rot = std::polar(1.0, -h * x);
    std::complex<double> e{ 1.0, 0.0 };
    // running = h * (v_0 / 2 + v_1 + ... + v_k)
    std::complex<double> running{};
    std::size_t next = 0;
    for (std::size_t k = 0; k <= last_node && next < order.size(); ++k) {
      if (k > 0) {
        e = k % resync == 0 ? std::polar(1.0, -root.grid.at(k) * x) : e * rot;
      }
      const std::complex<double> v = e * phi_x[k];
      running += (k == 0 ? 0.5 * h : h) * v;
      while (next < order.size() && stops[order[next]].node == k) {
        const Stop& s = stops[order[next]];
        std::complex<double> total = running - 0.5 * h * v;
        if (s.delta > 0.0) {
          const std::complex<double> v_end = std::polar(1.0, -s.m * x) * s.end_value;
          total += 0.5 * s.delta * (v + v_end);
        }
        out[order[next]][ix] = total.real() / std::numbers::pi;
        ++next;
      }
    }
  }
  return out;
}

//! Options applied after inversion.
struct InvertOptions
{
  //! Clip negative values to 0 and rescale to unit mass on the x grid.
  bool clip_and_renormalize = false;
};

inline void
clip_and_renormalize(DensityEstimate& est)
{
  for (double& v : est.values)
    v = std::max(v, 0.0);
  const double mass = integrate(est.values, est.xgrid);
  if (mass > 0)
    for (double& v : est.values)
      v /= mass;
}

//! Density estimate with spectral cutoff m.
inline DensityEstimate
invert(const RootEstimate& root,
       const CutoffRecord& cutoff,
       const XGrid& xgrid,
       InvertOptions options = {})
{
  const double m = cutoff.value;
  auto rows = invert_many(root, std::span<const double>(&m, 1), xgrid);
  DensityEstimate est{ xgrid, std::move(rows.front()), cutoff, root.group_size, {} };
  if (options.clip_and_renormalize)
    clip_and_renormalize(est);
  return est;
}

inline DensityEstimate
invert(const RootEstimate& root, double m, const XGrid& xgrid)
{
  return invert(root, CutoffRecord::fixed(m), xgrid);
}

//! Trapezoid approximation of int (a - b)^2 over xgrid. Either argument may be
//! a DensityEstimate (linearly interpolated, zero off its grid) or any callable
//! double(double).
template<typename A, typename B>
double
l2_distance(const A& a, const B& b, const XGrid& xgrid)
{
  auto sample_on = [&xgrid](const auto& f) {
    using F = std::decay_t<decltype(f)>;
    std::vector<double> v(xgrid.count);
    if constexpr (std::is_same_v<F, DensityEstimate>) {
      if (f.xgrid == xgrid)
        return f.values;
    }
    for (std::size_t i = 0; i < xgrid.count; ++i)
      v[i] = f(xgrid.at(i));
    return v;
  };
  const auto va = sample_on(a);
  const auto vb = sample_on(b);
  const auto w = detail::trapezoid_weights(xgrid);
  double s = 0.0;
  for (std::size_t i = 0; i < xgrid.count; ++i)
    s += w[i] * (va[i] - vb[i]) * (va[i] - vb[i]);
  return s;
}

//! (1/2pi) int_{-m}^{m} |phi_X|^2 du with the same trapezoid rule as inversion.
inline double
spectral_energy(const RootEstimate& root, double m)
{
  if (m > root.u_limit() * (1.0 + 1e-12))
    throw CutoffExceedsRange(detail::concat("cutoff ", m,
                                            " exceeds root range ", root.u_limit()));
  const double h = root.grid.step();
  std::size_t node = std::min(root.grid.count_upto(m) - 1, root.size() - 1);
  double s = 0.0;
  for (std::size_t k = 0; k <= node; ++k) {
    const double w = (k == 0 || k == node) ? 0.5 * h : h;
    s += w * root.modulus_pow[k] * root.modulus_pow[k];
  }
  const double delta = m - root.grid.at(node);
  if (delta > 1e-12 * std::max(1.0, m) && node + 1 < root.size()) {
    const double t = delta / h;
    const auto end = (1.0 - t) * root.value(node) + t * root.value(node + 1);
    s += 0.5 * delta * (root.modulus_pow[node] * root.modulus_pow[node] + std::norm(end));
  }
  // symmetric in u: 2 * int_0^m / (2 pi)
  return s / std::numbers::pi;
}

} // namespace groupdeconv
