#pragma once

#include "charfn.hpp"
#include "errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

namespace groupdeconv {

//! Smallest |phi_hat| accepted in the denominator of phi_hat'/phi_hat.
//! n = 0 denotes exact cf values.
inline double
denominator_floor(std::size_t n)
{
  if (n == 0)
    return 1e-12;
  return std::max(1e-3 / std::sqrt(static_cast<double>(n)), 1e-12);
}

struct RootWarning
{
  double u;
  std::string condition;
};

//! Distinguished root phi_hat_X on the nonnegative half of a grid, stored as
//! modulus and continuous phase; the negative half follows by conjugation.
struct RootEstimate
{
  UGrid grid;
  //! |phi_hat(u_k)|^(1/group_size)
  std::vector<double> modulus_pow;
  //! Im psi_hat(u_k) / group_size, zero at u = 0.
  std::vector<double> phase;
  double group_size = 1.0;
  std::vector<RootWarning> warnings;

  std::size_t size() const noexcept { return modulus_pow.size(); }
  //! Largest u at which the root is available.
  double u_limit() const noexcept
  {
    return size() == 0 ? 0.0 : grid.at(size() - 1);
  }
  std::complex<double> value(std::size_t k) const
  {
    return std::polar(modulus_pow[k], phase[k]);
  }
  //! phi_hat_X at the signed grid index k.
  std::complex<double> value_signed(std::ptrdiff_t k) const
  {
    return k >= 0 ? value(static_cast<std::size_t>(k))
                  : std::conj(value(static_cast<std::size_t>(-k)));
  }
};

struct RootOptions
{
  //! On a floor violation, stop at the last feasible point and record a
  //! warning instead of throwing DenominatorTooSmall.
  bool truncate_at_floor = false;
};

namespace detail {

inline std::size_t
root_point_count(const CfEvaluation& cf, double u_limit)
{
  detail::require(std::isfinite(u_limit) && u_limit >= 0,
                  "u_limit must be >= 0 (got ", u_limit, ")");
  detail::require(u_limit <= cf.grid.u_max() * (1.0 + 1e-12),
                  "u_limit ", u_limit, " exceeds grid range ", cf.grid.u_max());
  return cf.grid.count_upto(u_limit);
}

} // namespace detail

//! psi_hat(u_k) = int_0^{u_k} phi_hat'/phi_hat by cumulative trapezoid,
//! for the grid points in [0, u_limit].
inline std::vector<std::complex<double>>
distinguished_log(const CfEvaluation& cf, double u_limit)
{
  const std::size_t count = detail::root_point_count(cf, u_limit);
  const double floor = denominator_floor(cf.n);
  const auto phi = cf.phi_positive();
  const auto dphi = cf.dphi_positive();
  const double h = cf.grid.step();

  std::vector<std::complex<double>> psi(count);
  std::complex<double> prev{};
  for (std::size_t k = 0; k < count; ++k) {
    const double modulus = std::abs(phi[k]);
    if (!(modulus >= floor))
      throw DenominatorTooSmall(cf.grid.at(k), modulus, floor);
    const std::complex<double> g = dphi[k] / phi[k];
    psi[k] = k == 0 ? std::complex<double>{} : psi[k - 1] + 0.5 * h * (prev + g);
    prev = g;
  }
  return psi;
}

//! phi_hat_X = |phi_hat|^(1/K) exp(i Im psi_hat / K). The modulus is taken
//! directly; only the phase is integrated.
inline RootEstimate
distinguished_root(const CfEvaluation& cf,
                   double u_limit,
                   double group_size,
                   RootOptions options = {})
{
  detail::require(std::isfinite(group_size) && group_size >= 1.0,
                  "group size must be >= 1 (got ", group_size, ")");
  const std::size_t count = detail::root_point_count(cf, u_limit);
  const double floor = denominator_floor(cf.n);
  const auto phi = cf.phi_positive();
  const auto dphi = cf.dphi_positive();
  const double h = cf.grid.step();
  const double inv_k = 1.0 / group_size;

  RootEstimate root{ cf.grid, {}, {}, group_size, {} };
  root.modulus_pow.reserve(count);
  root.phase.reserve(count);

  double im_psi = 0.0;
  double prev = 0.0;
  bool big_step_reported = false;
  for (std::size_t k = 0; k < count; ++k) {
    const double modulus = std::abs(phi[k]);
    if (!(modulus >= floor)) {
      if (!options.truncate_at_floor)
        throw DenominatorTooSmall(cf.grid.at(k), modulus, floor);
      root.warnings.push_back(
        { cf.grid.at(k),
          detail::concat("denominator below floor ", floor,
                         "; root truncated at u = ",
                         k == 0 ? 0.0 : cf.grid.at(k - 1)) });
      break;
    }
    const double g = (dphi[k] / phi[k]).imag();
    if (k > 0) {
      const double increment = 0.5 * h * (prev + g);
      im_psi += increment;
      if (!big_step_reported &&
          std::abs(increment * inv_k) >= std::numbers::pi / 4) {
        root.warnings.push_back(
          { cf.grid.at(k), "phase increment per step >= pi/4; grid too coarse" });
        big_step_reported = true;
      }
    }
    prev = g;
    root.modulus_pow.push_back(k == 0 ? 1.0 : std::pow(modulus, inv_k));
    root.phase.push_back(im_psi * inv_k);
  }
  if (root.modulus_pow.empty())
    throw DenominatorTooSmall(0.0, std::abs(phi[0]), floor);
  return root;
}

} // namespace groupdeconv
