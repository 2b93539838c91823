#include "spadapt/logmath.hpp"

#include <numbers>

namespace spadapt {

namespace {

double log_phi(double x) {
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Mills-ratio expansion of the lower tail.
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2));
}

}  // namespace

double log_normal_interval(double a, double b) {
  if (!(a < b)) return kNegInf;
  if (a > 0.0) return log_normal_interval(-b, -a);
  if (b <= 0.0) {
    const double lb = log_phi(b);
    const double la = log_phi(a);
    return lb + std::log1p(-std::exp(la - lb));
  }
  // a <= 0 < b: 1 - Phi(a) - Phi(-b), both tails small or moderate.
  const double tails = 0.5 * std::erfc(-a / std::numbers::sqrt2) +
                       0.5 * std::erfc(b / std::numbers::sqrt2);
  return std::log1p(-tails);
}

}  // namespace spadapt
