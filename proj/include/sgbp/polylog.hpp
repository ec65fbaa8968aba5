#pragma once

// Real-valued polylogarithms Li_2 and Li_3 on [0, inf). For y > 1 the
// analytic continuation is complex; these return its real part, which does
// not depend on the side of the branch cut.

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/zeta.hpp>

#include "sgbp/error.hpp"

namespace sgbp::polylog {

namespace detail {

inline double direct_series(int order, double y) {
  double term = y;
  double sum = 0.0;
  for (int k = 1; k < 2000; ++k) {
    const double add = term / std::pow(static_cast<double>(k), order);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    term *= y;
  }
  return sum;
}

// Expansion in mu = ln y, valid for |mu| < 2 pi:
// Li_n(e^mu) = sum_{k != n-1} zeta(n-k) mu^k / k! + mu^{n-1}/(n-1)! (H_{n-1} - ln(-mu)).
inline double log_series(int order, double y) {
  const double mu = std::log(y);
  double harmonic = 0.0;
  for (int j = 1; j < order; ++j) harmonic += 1.0 / j;
  double sum = 0.0;
  double power = 1.0;  // mu^k / k!
  for (int k = 0; k < 60; ++k) {
    double add;
    if (k == order - 1) {
      const double log_term = (mu == 0.0) ? 0.0 : std::log(std::abs(mu));
      add = (mu == 0.0 && k > 0) ? 0.0 : power * (harmonic - log_term);
    } else {
      add = boost::math::zeta(static_cast<double>(order - k)) * power;
    }
    sum += add;
    power *= mu / (k + 1);
  }
  return sum;
}

}  // namespace detail

/// Re Li_2(y), y >= 0.
inline double li2(double y) {
  if (y < 0.0) throw DomainError("li2: negative argument not supported");
  if (y <= 0.5) return detail::direct_series(2, y);
  if (y < 4.0) return detail::log_series(2, y);
  const double L = std::log(y);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return pi2 / 3.0 - 0.5 * L * L - detail::direct_series(2, 1.0 / y);
}

/// Re Li_3(y), y >= 0.
inline double li3(double y) {
  if (y < 0.0) throw DomainError("li3: negative argument not supported");
  if (y <= 0.5) return detail::direct_series(3, y);
  if (y < 4.0) return detail::log_series(3, y);
  const double L = std::log(y);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return -L * L * L / 6.0 + pi2 * L / 3.0 + detail::direct_series(3, 1.0 / y);
}

/// Re log(1 - y) for y >= 0, y != 1.
inline double log_one_minus(double y) {
  if (y == 1.0) throw DomainError("log_one_minus: singular at 1");
  return std::log(std::abs(1.0 - y));
}

}  // namespace sgbp::polylog
