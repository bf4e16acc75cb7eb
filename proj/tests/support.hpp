#pragma once

// Independent numerical oracles for the tests. Nothing here calls into the
// code paths under test.

#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

namespace test_support {

//! Composite Simpson on [a, b] with an even number of intervals.
template<typename F>
auto
simpson(F&& f, double a, double b, std::size_t intervals)
{
  if (intervals % 2)
    ++intervals;
  const double h = (b - a) / static_cast<double>(intervals);
  auto sum = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i)
    sum += (i % 2 ? 4.0 : 2.0) * f(a + static_cast<double>(i) * h);
  return sum * (h / 3.0);
}

inline std::string
tmp_path(const std::string& name)
{
  return std::string(GROUPDECONV_TEST_TMP) + "/" + name;
}

inline void
write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string
read_text(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace test_support
