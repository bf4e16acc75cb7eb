#pragma once

#include "errors.hpp"

#include <cmath>
#include <string>

namespace groupdeconv {

enum class CutoffRule
{
  adaptive,
  oracle,
  fixed,
  diagnostic
};

inline std::string
to_string(CutoffRule rule)
{
  switch (rule) {
    case CutoffRule::adaptive:
      return "adaptive";
    case CutoffRule::oracle:
      return "oracle";
    case CutoffRule::fixed:
      return "fixed";
    case CutoffRule::diagnostic:
      return "diagnostic";
  }
  return {};
}

//! A spectral cutoff and how it was obtained.
struct CutoffRecord
{
  double value = 0.0;
  CutoffRule rule = CutoffRule::fixed;
  //! adaptive: eta; diagnostic: gamma
  double eta = 0.0;
  //! diagnostic only
  double eps = 0.0;
  //! adaptive: false when the cap n^(1/K) was returned
  bool threshold_hit = false;
  //! adaptive: the modulus level searched for
  double threshold = 0.0;
  //! adaptive: the cap that applied
  double cap = 0.0;
  double scan_resolution = 0.0;

  static CutoffRecord fixed(double m)
  {
    detail::require(std::isfinite(m) && m > 0, "cutoff must be > 0 (got ", m, ")");
    CutoffRecord r;
    r.value = m;
    r.rule = CutoffRule::fixed;
    return r;
  }
};

} // namespace groupdeconv
