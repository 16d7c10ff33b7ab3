#pragma once

#include <cmath>

namespace smi::stats {

inline constexpr double kDefaultAsymptoticSwitch = 8.0;

// Variance floor applied to each sample variance before forming standard
// errors, so degenerate fixtures (zero spread) stay finite.
inline constexpr double kVarianceFloor = 1e-12;

// log(1 - Phi(t)) for t >= 0, exact route: the tail stays representable in
// double precision up to t ~ 37, far past any switch point in use.
inline double log_normal_tail_exact(double t) {
  return std::log(0.5 * std::erfc(t / std::sqrt(2.0)));
}

// log(1 - Phi(t)) via the large-t expansion 1 - Phi(t) ~ phi(t) / t,
// i.e. log tail ~ -t^2/2 - log(t * sqrt(2*pi)).
inline double log_normal_tail_asymptotic(double t) {
  static const double kLogSqrt2Pi = 0.5 * std::log(2.0 * 3.14159265358979323846);
  return -0.5 * t * t - std::log(t) - kLogSqrt2Pi;
}

// log(1 - Phi(t)) for t >= 0, switching to the asymptotic branch past
// `switch_point`. Both branches agree within 2% relative at the default
// switch of 8 (tested).
inline double log_normal_tail(double t, double switch_point = kDefaultAsymptoticSwitch) {
  return t > switch_point ? log_normal_tail_asymptotic(t)
                          : log_normal_tail_exact(t);
}

// log(Phi(z)) for any z, computed fully in log space so p-values can be
// compared at magnitudes far below double underflow.
inline double log_normal_cdf(double z, double switch_point = kDefaultAsymptoticSwitch) {
  if (z <= 0.0) return log_normal_tail(-z, switch_point);
  // Phi(z) = 1 - tail(z); tail is tiny for large positive z, so log1p is exact.
  return std::log1p(-std::exp(log_normal_tail(z, switch_point)));
}

}  // namespace smi::stats
