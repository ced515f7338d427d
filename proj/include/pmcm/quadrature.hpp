#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace pmcm::quad {

template <class F>
double gauss8(F&& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss<double, 8>::integrate(f, a, b);
}

template <class F>
double composite_gauss8(F&& f, double a, double b, int pieces) {
  if (a == b) return 0.0;
  pieces = std::max(pieces, 1);
  const double step = (b - a) / pieces;
  double sum = 0.0;
  for (int k = 0; k < pieces; ++k) {
    const double lo = a + k * step;
    const double hi = (k + 1 == pieces) ? b : lo + step;
    sum += gauss8(f, lo, hi);
  }
  return sum;
}

// Adaptive 15/31 Gauss-Kronrod. Integrands are expected to be smooth on [a, b].
template <class F>
double adaptive(F&& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol);
}

// Composite rule over [a, b] split at every breakpoint falling inside it.
template <class F>
double split_gauss8(F&& f, double a, double b, std::vector<double> breaks, int pieces_per_segment) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double lo = std::max(a, breaks[k]);
    const double hi = std::min(b, breaks[k + 1]);
    if (hi > lo) sum += composite_gauss8(f, lo, hi, pieces_per_segment);
  }
  return sum;
}

}  // namespace pmcm::quad
