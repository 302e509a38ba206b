#include "rerm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rerm::rng {

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; uniform01 is in (0,1] so the log is finite.
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double Stream::gamma(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("Stream::gamma: alpha must be > 0");
  if (alpha < 1.0) {
    const double g = gamma(alpha + 1.0);
    return g * std::pow(uniform01(), 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Stream::student_t(double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("Stream::student_t: dof must be > 0");
  const double z = normal();
  const double chi2 = 2.0 * gamma(0.5 * dof);  // chi-square with dof degrees of freedom
  return z / std::sqrt(chi2 / dof);
}

}  // namespace rerm::rng
