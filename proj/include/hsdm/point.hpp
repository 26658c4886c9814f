#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hsdm {

// Dense real vector modeling an element of the Hilbert space at desk scale.
using Point = std::vector<double>;

inline void require_same_dim(const Point& x, const Point& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("dimension mismatch: " + std::to_string(x.size()) +
                                " vs " + std::to_string(y.size()));
}

inline double inner(const Point& x, const Point& y) {
  require_same_dim(x, y);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

inline double norm2(const Point& x) { return inner(x, x); }

inline double norm(const Point& x) { return std::sqrt(norm2(x)); }

inline double dist(const Point& x, const Point& y) {
  require_same_dim(x, y);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return std::sqrt(s);
}

inline Point add(const Point& x, const Point& y) {
  require_same_dim(x, y);
  Point r(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) r[k] = x[k] + y[k];
  return r;
}

inline Point sub(const Point& x, const Point& y) {
  require_same_dim(x, y);
  Point r(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) r[k] = x[k] - y[k];
  return r;
}

inline Point scale(double a, const Point& x) {
  Point r(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) r[k] = a * x[k];
  return r;
}

// (1-t)x + t y
inline Point blend(double t, const Point& x, const Point& y) {
  require_same_dim(x, y);
  Point r(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) r[k] = (1.0 - t) * x[k] + t * y[k];
  return r;
}

inline bool all_finite(const Point& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace hsdm
