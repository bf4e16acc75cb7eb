#pragma once

#include "errors.hpp"
#include "samples.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace groupdeconv {

//! Uniform frequency grid {-u_max, ..., -step, 0, step, ..., u_max}.
//! u_max is rounded down to a multiple of step.
class UGrid
{
public:
  UGrid(double u_max, double step)
    : step_(step)
  {
    detail::require(std::isfinite(step) && step > 0,
                    "grid step must be > 0 (got ", step, ")");
    detail::require(std::isfinite(u_max) && u_max >= step,
                    "grid u_max must be >= step (u_max = ", u_max,
                    ", step = ", step, ")");
    // Relative slack so that u_max = N * step lands on N despite rounding.
    half_ = static_cast<std::size_t>(std::floor(u_max / step * (1.0 + 1e-12)));
  }

  double step() const noexcept { return step_; }
  //! Largest grid point.
  double u_max() const noexcept { return static_cast<double>(half_) * step_; }
  //! Index of the largest nonnegative point; the grid has 2 * half() + 1 points.
  std::size_t half() const noexcept { return half_; }
  std::size_t size() const noexcept { return 2 * half_ + 1; }
  //! k-th nonnegative point.
  double at(std::size_t k) const noexcept
  {
    return static_cast<double>(k) * step_;
  }
  //! Number of nonnegative points not exceeding u.
  std::size_t count_upto(double u) const noexcept
  {
    if (u < 0)
      return 0;
    const auto k =
      static_cast<std::size_t>(std::floor(u / step_ * (1.0 + 1e-12)));
    return std::min(k, half_) + 1;
  }

private:
  double step_;
  std::size_t half_;
};

//! phi_hat and phi_hat' on a symmetric grid. Arrays are indexed by
//! half() + k for the signed grid index k in [-half(), half()].
struct CfEvaluation
{
  UGrid grid;
  std::vector<std::complex<double>> phi;
  std::vector<std::complex<double>> dphi;
  //! Sample size behind the values; 0 marks an exact (analytic) input.
  std::size_t n = 0;
  double group_size = 1.0;

  std::complex<double> phi_at(std::ptrdiff_t k) const
  {
    return phi[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(grid.half()) + k)];
  }
  std::complex<double> dphi_at(std::ptrdiff_t k) const
  {
    return dphi[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(grid.half()) + k)];
  }

  //! Nonnegative half of phi, index k <-> u = k * step.
  std::span<const std::complex<double>> phi_positive() const
  {
    return { phi.data() + grid.half(), grid.half() + 1 };
  }
  std::span<const std::complex<double>> dphi_positive() const
  {
    return { dphi.data() + grid.half(), grid.half() + 1 };
  }

  //! Builds the symmetric arrays from nonnegative-half values by conjugation.
  static CfEvaluation from_positive(UGrid grid,
                                    std::span<const std::complex<double>> phi_pos,
                                    std::span<const std::complex<double>> dphi_pos,
                                    std::size_t n,
                                    double group_size)
  {
    const std::size_t h = grid.half();
    detail::require(phi_pos.size() == h + 1 && dphi_pos.size() == h + 1,
                    "cf values do not match grid size");
    CfEvaluation out{ grid, {}, {}, n, group_size };
    out.phi.resize(grid.size());
    out.dphi.resize(grid.size());
    for (std::size_t k = 0; k <= h; ++k) {
      out.phi[h + k] = phi_pos[k];
      out.dphi[h + k] = dphi_pos[k];
      // phi(-u) = conj(phi(u)); phi'(-u) = -conj(phi'(u))
      out.phi[h - k] = std::conj(phi_pos[k]);
      out.dphi[h - k] = -std::conj(dphi_pos[k]);
    }
    return out;
  }

  //! Evaluates an analytic cf and its derivative on the grid.
  template<typename Phi, typename DPhi>
  static CfEvaluation from_functions(UGrid grid,
                                     Phi&& phi_fn,
                                     DPhi&& dphi_fn,
                                     double group_size = 1.0)
  {
    std::vector<std::complex<double>> p(grid.half() + 1), d(grid.half() + 1);
    for (std::size_t k = 0; k <= grid.half(); ++k) {
      p[k] = phi_fn(grid.at(k));
      d[k] = dphi_fn(grid.at(k));
    }
    return from_positive(grid, p, d, 0, group_size);
  }
};

namespace detail {

//! Observations are summed in fixed blocks and the block sums combined
//! pairwise, so the result does not depend on how work is partitioned.
inline constexpr std::size_t sum_block = 256;

template<typename T>
T
pairwise_reduce(std::vector<T>& parts)
{
  if (parts.empty())
    return T{};
  std::size_t len = parts.size();
  while (len > 1) {
    const std::size_t half = (len + 1) / 2;
    for (std::size_t i = 0; i + half < len; ++i)
      parts[i] += parts[i + half];
    len = half;
  }
  return parts[0];
}

struct EcfSums
{
  double re = 0, im = 0;   // sum of cos, sin
  double dre = 0, dim = 0; // sum of Y cos, Y sin
  EcfSums& operator+=(const EcfSums& o)
  {
    re += o.re;
    im += o.im;
    dre += o.dre;
    dim += o.dim;
    return *this;
  }
};

} // namespace detail

//! Walks phi_hat, phi_hat' along u = 0, step, 2 step, ... in O(n) per point.
//! exp(i u Y_j) advances by complex multiplication and is recomputed exactly
//! every `resync` points to bound drift.
class EcfStepper
{
public:
  static constexpr std::size_t resync = 512;

  EcfStepper(const GroupedSample& sample, double step)
    : ys_(sample.observations())
    , step_(step)
  {
    detail::require(std::isfinite(step) && step > 0,
                    "scan step must be > 0 (got ", step, ")");
    const std::size_t n = ys_.size();
    zr_.assign(n, 1.0);
    zi_.assign(n, 0.0);
    wr_.resize(n);
    wi_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      wr_[j] = std::cos(step * ys_[j]);
      wi_[j] = std::sin(step * ys_[j]);
    }
    blocks_.resize((n + detail::sum_block - 1) / detail::sum_block);
  }

  std::size_t index() const noexcept { return k_; }
  double u() const noexcept { return static_cast<double>(k_) * step_; }

  //! phi_hat and phi_hat' at the current point, then advances.
  std::pair<std::complex<double>, std::complex<double>> next()
  {
    const std::size_t n = ys_.size();
    if (k_ > 0 && k_ % resync == 0) {
      const double u = this->u();
      for (std::size_t j = 0; j < n; ++j) {
        zr_[j] = std::cos(u * ys_[j]);
        zi_[j] = std::sin(u * ys_[j]);
      }
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const std::size_t lo = b * detail::sum_block;
      const std::size_t hi = std::min(n, lo + detail::sum_block);
      double re = 0, im = 0, dre = 0, dim = 0;
      for (std::size_t j = lo; j < hi; ++j) {
        const double zr = zr_[j], zi = zi_[j], y = ys_[j];
        re += zr;
        im += zi;
        dre += y * zr;
        dim += y * zi;
        zr_[j] = zr * wr_[j] - zi * wi_[j];
        zi_[j] = zr * wi_[j] + zi * wr_[j];
      }
      blocks_[b] = { re, im, dre, dim };
    }
    const auto s = detail::pairwise_reduce(blocks_);
    const double inv_n = 1.0 / static_cast<double>(n);
    ++k_;
    // phi' = (1/n) sum i Y e^{iuY} = (1/n) (-sum Y sin, sum Y cos)
    return { { s.re * inv_n, s.im * inv_n }, { -s.dim * inv_n, s.dre * inv_n } };
  }

private:
  const std::vector<double>& ys_;
  double step_;
  std::vector<double> zr_, zi_, wr_, wi_;
  std::vector<detail::EcfSums> blocks_;
  std::size_t k_ = 0;
};

namespace detail {

inline EcfSums
ecf_sums_at(const GroupedSample& sample, double u)
{
  const auto& ys = sample.observations();
  const std::size_t n = ys.size();
  std::vector<EcfSums> blocks((n + sum_block - 1) / sum_block);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t lo = b * sum_block;
    const std::size_t hi = std::min(n, lo + sum_block);
    double re = 0, im = 0, dre = 0, dim = 0;
    for (std::size_t j = lo; j < hi; ++j) {
      const double c = std::cos(u * ys[j]), s = std::sin(u * ys[j]);
      re += c;
      im += s;
      dre += ys[j] * c;
      dim += ys[j] * s;
    }
    blocks[b] = { re, im, dre, dim };
  }
  return pairwise_reduce(blocks);
}

} // namespace detail

//! Empirical characteristic function n^-1 sum_j exp(i u Y_j).
inline std::complex<double>
ecf_at(const GroupedSample& sample, double u)
{
  if (u == 0.0)
    return { 1.0, 0.0 };
  const auto s = detail::ecf_sums_at(sample, u);
  const double inv_n = 1.0 / static_cast<double>(sample.size());
  return { s.re * inv_n, s.im * inv_n };
}

//! n^-1 sum_j i Y_j exp(i u Y_j).
inline std::complex<double>
ecf_derivative_at(const GroupedSample& sample, double u)
{
  const auto s = detail::ecf_sums_at(sample, u);
  const double inv_n = 1.0 / static_cast<double>(sample.size());
  return { -s.dim * inv_n, s.dre * inv_n };
}

//! phi_hat and phi_hat' on every point of `grid`. The nonnegative half is
//! computed; the negative half is its conjugate.
inline CfEvaluation
evaluate_grid(const GroupedSample& sample, const UGrid& grid)
{
  const std::size_t h = grid.half();
  std::vector<std::complex<double>> p(h + 1), d(h + 1);
  EcfStepper stepper(sample, grid.step());
  for (std::size_t k = 0; k <= h; ++k) {
    auto [phi, dphi] = stepper.next();
    p[k] = phi;
    d[k] = dphi;
  }
  p[0] = { 1.0, 0.0 };
  return CfEvaluation::from_positive(grid, p, d, sample.size(), sample.group_size());
}

} // namespace groupdeconv
