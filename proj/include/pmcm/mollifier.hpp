#pragma once

#include <vector>

namespace pmcm {

// Standard bump rho(t) = exp(-1/(1-t^2)) / Z on (-1, 1) with its cumulative
// integral Phi(t) = \int_{-1}^t rho. Phi(1) == 1 up to the last ulp.
class Mollifier {
 public:
  static const Mollifier& standard();

  double density(double t) const;            // rho(t)
  double cumulative(double t) const;         // Phi(t)
  double inverse_cumulative(double p) const;  // Phi^{-1}(p), p in [0, 1]

  // Scaled kernel rho_delta(x) = rho(x / delta) / delta.
  double kernel(double x, double delta) const { return density(x / delta) / delta; }
  double kernel_derivative_bound(double delta) const;  // sup |rho_delta'|

 private:
  Mollifier();
  double raw(double t) const;
  double raw_piece(double lo, double hi) const;

  static constexpr int kTable = 2048;
  double norm_ = 1.0;
  double deriv_sup_ = 0.0;
  std::vector<double> table_;  // unnormalized Phi at t_k = -1 + 2k/kTable
};

}  // namespace pmcm
