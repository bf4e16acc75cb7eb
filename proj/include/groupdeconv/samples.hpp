#pragma once

#include "errors.hpp"
#include "rng.hpp"
#include "special.hpp"

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace groupdeconv {

//! Observations Y_1..Y_n of sums of `group_size` independent copies of X.
//! group_size is K for grouped data; a real value >= 1 is accepted for the
//! sampled-Levy-process reading (Y = increment over a window of length Delta).
class GroupedSample
{
public:
  GroupedSample(std::vector<double> observations, double group_size)
    : observations_(std::move(observations))
    , group_size_(group_size)
  {
    detail::require(observations_.size() >= 2,
                    "fewer than 2 observations (n = ",
                    observations_.size(),
                    ")");
    detail::require(std::isfinite(group_size_) && group_size_ >= 1.0,
                    "group size must be >= 1 (got ",
                    group_size_,
                    ")");
    for (std::size_t j = 0; j < observations_.size(); ++j)
      detail::require(std::isfinite(observations_[j]),
                      "observation ",
                      j + 1,
                      " is not finite");
  }

  const std::vector<double>& observations() const noexcept
  {
    return observations_;
  }
  double group_size() const noexcept { return group_size_; }
  std::size_t size() const noexcept { return observations_.size(); }

  double mean() const
  {
    return std::accumulate(observations_.begin(), observations_.end(), 0.0) /
           static_cast<double>(size());
  }

  //! Unbiased sample variance.
  double variance() const
  {
    const double mu = mean();
    double ss = 0.0;
    for (double y : observations_)
      ss += (y - mu) * (y - mu);
    return ss / static_cast<double>(size() - 1);
  }

  double max_abs() const
  {
    double m = 0.0;
    for (double y : observations_)
      m = std::max(m, std::abs(y));
    return m;
  }

private:
  std::vector<double> observations_;
  double group_size_;
};

enum class LawKind
{
  normal,
  gumbel,
  gamma,
  laplace
};

//! One of the four test distributions of the simulation study, with exact
//! density, characteristic function and sampler.
//!
//! Parameterizations:
//!   normal(mean, variance)
//!   gumbel(mean, scale)      location = mean - euler_gamma * scale
//!   gamma(shape, rate)       density r^k x^(k-1) e^(-rx) / Gamma(k)
//!   laplace(mean, scale)     density exp(-|x - mean| / scale) / (2 scale)
class TestLaw
{
public:
  static TestLaw normal(double mean, double variance)
  {
    detail::require(std::isfinite(mean), "normal mean must be finite");
    detail::require(variance > 0 && std::isfinite(variance),
                    "normal variance must be > 0 (got ", variance, ")");
    return TestLaw(LawKind::normal, mean, variance);
  }

  static TestLaw gumbel(double mean, double scale)
  {
    detail::require(std::isfinite(mean), "gumbel mean must be finite");
    detail::require(scale > 0 && std::isfinite(scale),
                    "gumbel scale must be > 0 (got ", scale, ")");
    return TestLaw(LawKind::gumbel, mean, scale);
  }

  static TestLaw gamma(double shape, double rate)
  {
    detail::require(shape > 0 && std::isfinite(shape),
                    "gamma shape must be > 0 (got ", shape, ")");
    detail::require(rate > 0 && std::isfinite(rate),
                    "gamma rate must be > 0 (got ", rate, ")");
    return TestLaw(LawKind::gamma, shape, rate);
  }

  static TestLaw laplace(double mean, double scale)
  {
    detail::require(std::isfinite(mean), "laplace mean must be finite");
    detail::require(scale > 0 && std::isfinite(scale),
                    "laplace scale must be > 0 (got ", scale, ")");
    return TestLaw(LawKind::laplace, mean, scale);
  }

  //! The four laws of the simulation study, in table order. The Laplace
  //! law has rate 3, i.e. density (3/2) exp(-3 |x - 0.5|).
  static std::vector<TestLaw> study_laws()
  {
    return { normal(2.0, 1.0), gumbel(3.0, 1.0), gamma(6.0, 3.0),
             laplace(0.5, 1.0 / 3.0) };
  }

  LawKind kind() const noexcept { return kind_; }
  double first() const noexcept { return a_; }
  double second() const noexcept { return b_; }

  std::string name() const
  {
    switch (kind_) {
      case LawKind::normal:
        return "normal";
      case LawKind::gumbel:
        return "gumbel";
      case LawKind::gamma:
        return "gamma";
      case LawKind::laplace:
        return "laplace";
    }
    return {};
  }

  //! e.g. "normal(2,1)"
  std::string label() const
  {
    return detail::concat(name(), "(", a_, ",", b_, ")");
  }

  double mean() const noexcept
  {
    switch (kind_) {
      case LawKind::normal:
      case LawKind::gumbel:
      case LawKind::laplace:
        return a_;
      case LawKind::gamma:
        return a_ / b_;
    }
    return 0.0;
  }

  double variance() const noexcept
  {
    constexpr double pi = std::numbers::pi;
    switch (kind_) {
      case LawKind::normal:
        return b_;
      case LawKind::gumbel:
        return pi * pi * b_ * b_ / 6.0;
      case LawKind::gamma:
        return a_ / (b_ * b_);
      case LawKind::laplace:
        return 2.0 * b_ * b_;
    }
    return 0.0;
  }

  double gumbel_location() const noexcept
  {
    return a_ - std::numbers::egamma * b_;
  }

  double density(double x) const
  {
    constexpr double pi = std::numbers::pi;
    switch (kind_) {
      case LawKind::normal:
        return std::exp(-(x - a_) * (x - a_) / (2.0 * b_)) /
               std::sqrt(2.0 * pi * b_);
      case LawKind::gumbel: {
        const double z = (x - gumbel_location()) / b_;
        return std::exp(-(z + std::exp(-z))) / b_;
      }
      case LawKind::gamma:
        if (x <= 0.0)
          return 0.0;
        return std::exp(a_ * std::log(b_) + (a_ - 1.0) * std::log(x) -
                        b_ * x - std::lgamma(a_));
      case LawKind::laplace:
        return std::exp(-std::abs(x - a_) / b_) / (2.0 * b_);
    }
    return 0.0;
  }

  //! Exact characteristic function E[exp(iuX)].
  std::complex<double> cf(double u) const
  {
    using C = std::complex<double>;
    constexpr C i{ 0.0, 1.0 };
    switch (kind_) {
      case LawKind::normal:
        return std::exp(C{ -0.5 * b_ * u * u, a_ * u });
      case LawKind::gumbel:
        return gamma_fn(C{ 1.0, -b_ * u }) *
               std::exp(C{ 0.0, gumbel_location() * u });
      case LawKind::gamma:
        // 1 - iu/r has positive real part, so the principal log is continuous.
        return std::exp(-a_ * std::log(C{ 1.0, -u / b_ }));
      case LawKind::laplace:
        return std::exp(i * (a_ * u)) / (1.0 + b_ * b_ * u * u);
    }
    return {};
  }

  double draw(Engine& engine) const
  {
    switch (kind_) {
      case LawKind::normal:
        return std::normal_distribution<double>(a_, std::sqrt(b_))(engine);
      case LawKind::gumbel:
        return gumbel_location() - b_ * std::log(-std::log(open_uniform(engine)));
      case LawKind::gamma:
        return std::gamma_distribution<double>(a_, 1.0 / b_)(engine);
      case LawKind::laplace: {
        const double v = open_uniform(engine) - 0.5;
        const double mag = -b_ * std::log1p(-2.0 * std::abs(v));
        return v < 0 ? a_ - mag : a_ + mag;
      }
    }
    return 0.0;
  }

  friend bool operator==(const TestLaw&, const TestLaw&) = default;

private:
  TestLaw(LawKind kind, double a, double b)
    : kind_(kind)
    , a_(a)
    , b_(b)
  {}

  static std::complex<double> gamma_fn(std::complex<double> z)
  {
    return groupdeconv::gamma(z);
  }

  LawKind kind_;
  double a_;
  double b_;
};

//! n sums of K independent draws from `law`; reproducible for a given seed.
inline GroupedSample
generate_grouped(const TestLaw& law, std::size_t n, int K, std::uint64_t seed)
{
  detail::require(n >= 2, "n must be >= 2 (got ", n, ")");
  detail::require(K >= 1, "group size K must be >= 1 (got ", K, ")");
  Engine engine = make_engine(seed);
  std::vector<double> ys(n);
  for (auto& y : ys) {
    double s = 0.0;
    for (int k = 0; k < K; ++k)
      s += law.draw(engine);
    y = s;
  }
  return GroupedSample(std::move(ys), static_cast<double>(K));
}

inline std::complex<double>
true_cf(const TestLaw& law, double u)
{
  return law.cf(u);
}

namespace detail {

inline std::string_view
trim(std::string_view s)
{
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

//! Parses a whole token as a finite double.
inline bool
parse_double(std::string_view token, double& out)
{
  if (token.empty())
    return false;
  if (token.front() == '+')
    token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

} // namespace detail

//! Parses one observation per line from a text stream. Only the first
//! comma-separated field of each line is read; a non-numeric first line is
//! treated as a header; blank lines are skipped.
inline GroupedSample
parse_sample(std::istream& in, double group_size)
{
  detail::require(std::isfinite(group_size) && group_size >= 1.0,
                  "group size must be >= 1 (got ", group_size, ")");
  std::vector<double> ys;
  std::string line;
  std::size_t lineno = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    const auto comma = view.find(',');
    std::string_view field = view.substr(0, comma);
    const std::string_view token = detail::trim(field);
    if (token.empty() && detail::trim(view).empty())
      continue;
    double value = 0.0;
    if (detail::parse_double(token, value)) {
      ys.push_back(value);
      seen_content = true;
      continue;
    }
    if (!seen_content && lineno == 1) {
      seen_content = true;
      continue;
    }
    const std::size_t column =
      token.empty() ? 1 : static_cast<std::size_t>(token.data() - line.data()) + 1;
    throw ParseError(detail::concat("line ", lineno, ", column ", column,
                                    ": cannot parse '", token,
                                    "' as a finite number"),
                     lineno,
                     column);
  }
  if (ys.size() < 2)
    throw ParameterError(detail::concat("fewer than 2 observations (n = ",
                                        ys.size(), ")"));
  return GroupedSample(std::move(ys), group_size);
}

inline GroupedSample
load_sample(const std::string& path, double group_size)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  return parse_sample(in, group_size);
}

} // namespace groupdeconv
