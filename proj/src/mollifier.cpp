#include "pmcm/mollifier.hpp"

#include "pmcm/quadrature.hpp"

#include <cmath>

namespace pmcm {

const Mollifier& Mollifier::standard() {
  static const Mollifier instance;
  return instance;
}

Mollifier::Mollifier() : table_(kTable + 1, 0.0) {
  const double step = 2.0 / kTable;
  for (int k = 0; k < kTable; ++k) {
    const double lo = -1.0 + k * step;
    table_[k + 1] = table_[k] + raw_piece(lo, lo + step);
  }
  norm_ = table_[kTable];
  // rho' attains its sup at a point in (0.5, 0.6); a fine scan is plenty.
  double best = 0.0;
  for (int k = 1; k < 20000; ++k) {
    const double t = -1.0 + k * (2.0 / 20000);
    const double q = 1.0 - t * t;
    best = std::max(best, std::abs(raw(t) * 2.0 * t / (q * q)));
  }
  deriv_sup_ = best / norm_;
}

double Mollifier::raw(double t) const {
  const double q = 1.0 - t * t;
  if (q <= 0.0) return 0.0;
  return std::exp(-1.0 / q);
}

double Mollifier::raw_piece(double lo, double hi) const {
  return quad::gauss8([this](double t) { return raw(t); }, lo, hi);
}

double Mollifier::density(double t) const { return raw(t) / norm_; }

double Mollifier::cumulative(double t) const {
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double step = 2.0 / kTable;
  int k = static_cast<int>(std::floor((t + 1.0) / step));
  k = std::clamp(k, 0, kTable - 1);
  const double lo = -1.0 + k * step;
  return (table_[k] + raw_piece(lo, t)) / norm_;
}

double Mollifier::inverse_cumulative(double p) const {
  if (p <= 0.0) return -1.0;
  if (p >= 1.0) return 1.0;
  double lo = -1.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cumulative(mid) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double Mollifier::kernel_derivative_bound(double delta) const { return deriv_sup_ / (delta * delta); }

}  // namespace pmcm
