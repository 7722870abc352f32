#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sle0/errors.hpp"

namespace sle0 {

/// 2n distinct boundary points, strictly increasing.
struct Configuration {
  std::vector<double> x;

  Configuration() = default;
  explicit Configuration(std::vector<double> pts) : x(std::move(pts)) {
    if (x.size() < 2 || x.size() % 2 != 0)
      throw InvalidInput("configuration: need an even number (>= 2) of points");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) throw InvalidInput("x must be strictly increasing");
  }

  int n() const { return static_cast<int>(x.size()) / 2; }
  int size() const { return static_cast<int>(x.size()); }

  double diameter() const { return x.back() - x.front(); }
  double min_gap() const {
    double g = x[1] - x[0];
    for (std::size_t i = 2; i < x.size(); ++i) g = std::min(g, x[i] - x[i - 1]);
    return g;
  }
  double mean() const {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
  }

  Configuration translated(double h) const {
    std::vector<double> y = x;
    for (double& v : y) v += h;
    return Configuration(std::move(y));
  }
  Configuration scaled(double r) const {
    std::vector<double> y = x;
    for (double& v : y) v *= r;
    if (r < 0.0) std::reverse(y.begin(), y.end());
    return Configuration(std::move(y));
  }
};

// elementary symmetric functions e_0..e_k of the coordinates
inline std::vector<double> elementary_symmetric(const std::vector<double>& x, int k) {
  std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t m = 0; m < x.size(); ++m)
    for (int i = std::min<int>(k, static_cast<int>(m) + 1); i >= 1; --i)
      e[i] += x[m] * e[i - 1];
  return e;
}

}  // namespace sle0
