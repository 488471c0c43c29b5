#include <algorithm>
#include <cmath>
#include <limits>

#include "gail/core.hpp"

namespace gail {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Acklam's rational approximation followed by one Halley step.
double norm_inv(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  constexpr double phigh = 1 - plow;

  if (std::isnan(p)) return p;
  p = std::clamp(p, std::numeric_limits<double>::denorm_min(), 1.0 - 0x1.0p-53);
  if (p == 0.5) return 0.0;

  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }

  // Halley refinement; the tail residual uses the complementary CDF so the
  // step keeps relative accuracy there.
  double e = x < 0 ? 0.5 * std::erfc(-x / std::sqrt(2.0)) - p
                   : (1 - p) - 0.5 * std::erfc(x / std::sqrt(2.0));
  double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  // far tail: the density underflows and the approximation is kept as is
  if (std::isfinite(u)) x = x - u / (1 + x * u / 2);
  return x;
}

}  // namespace gail
