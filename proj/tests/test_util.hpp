#ifndef GEOCONNECT_TEST_UTIL_HPP
#define GEOCONNECT_TEST_UTIL_HPP

#include <random>
#include <span>
#include <vector>

#include "geoconnect/linalg.hpp"

namespace testutil {

using geoconnect::Vec;

inline std::mt19937_64 rng(unsigned long seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline Vec random_point(std::mt19937_64& g, int d, double lo, double hi) {
  Vec p(d);
  for (auto& v : p) v = uniform(g, lo, hi);
  return p;
}

// Central finite difference of a scalar function of one coordinate.
template <class F>
double central_fd(F f, double x, double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

}  // namespace testutil

#endif
