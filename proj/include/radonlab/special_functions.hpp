#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace radonlab {

/// Sine integral Si(x) = int_0^x sin(s)/s ds.
/// Power series for |x| <= 4. Beyond that, E_1(ix) = -Ci(x) + i (Si(x) - pi/2) is
/// evaluated by its continued fraction (modified Lentz) and Si read off the
/// imaginary part.
inline double sine_integral(double x) {
  if (x == 0) return 0.0;
  if (x < 0) return -sine_integral(-x);
  if (std::isinf(x)) return std::numbers::pi / 2;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (x <= 4.0) {
    // sum_{n>=0} (-1)^n x^{2n+1} / ((2n+1) (2n+1)!)
    double term = x;  // x^{2n+1}/(2n+1)!
    double sum = x;
    for (int n = 1; n < 60; ++n) {
      term *= -x * x / (double(2 * n) * double(2 * n + 1));
      const double add = term / double(2 * n + 1);
      sum += add;
      if (std::abs(add) < eps * std::abs(sum)) break;
    }
    return sum;
  }
  // E_1(z) = e^{-z} / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...))) with z = i x
  using C = std::complex<double>;
  const C z(0.0, x);
  const double tiny = 1e-300;
  C b = z + 1.0;
  C c = 1.0 / tiny;
  C d = 1.0 / b;
  C h = d;
  for (int i = 1; i < 1000; ++i) {
    const double a = -double(i) * double(i);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const C del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  const C e1 = h * std::exp(-z);
  return std::numbers::pi / 2 + e1.imag();
}

}  // namespace radonlab
