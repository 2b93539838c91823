#include "spadapt/slab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spadapt/logmath.hpp"

namespace spadapt {

void Slab::validate() const {
  if (kind == SlabKind::gaussian && !(scale > 0.0)) {
    throw std::invalid_argument("Slab: gaussian scale must be positive");
  }
  if (kind == SlabKind::uniform && !(radius > 0.0)) {
    throw std::invalid_argument("Slab: uniform radius must be positive");
  }
}

double slab_log_predictive(double y, double precision, const Slab& slab) {
  if (slab.kind == SlabKind::gaussian) {
    return log_normal_pdf(y, 0.0, slab.scale * slab.scale + 1.0 / precision);
  }
  const double s = std::sqrt(precision);
  return log_normal_interval(s * (-slab.radius - y), s * (slab.radius - y)) -
         std::log(2.0 * slab.radius);
}

SlabPosterior slab_posterior(double y, double precision, const Slab& slab) {
  if (slab.kind == SlabKind::gaussian) {
    const double post = precision + 1.0 / (slab.scale * slab.scale);
    return {precision * y / post, 1.0 / std::sqrt(post)};
  }
  // N(y, 1/precision) truncated to [-R, R].
  const double s = 1.0 / std::sqrt(precision);
  const double a = (-slab.radius - y) / s;
  const double b = (slab.radius - y) / s;
  const double log_mass = log_normal_interval(a, b);
  const double pa = std::exp(log_normal_pdf(a, 0.0, 1.0) - log_mass);
  const double pb = std::exp(log_normal_pdf(b, 0.0, 1.0) - log_mass);
  const double shift = pa - pb;
  const double var = s * s * std::max(0.0, 1.0 + a * pa - b * pb - shift * shift);
  const double mean = std::clamp(y + s * shift, -slab.radius, slab.radius);
  return {mean, std::sqrt(var)};
}

}  // namespace spadapt
