#pragma once

namespace rerm::stats {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile, p in (0,1). Accurate to ~1e-15 (rational
// approximation plus one Halley refinement).
double normal_quantile(double p);

// E|g|^q for g ~ N(0,1), q > 0.
double gaussian_abs_moment(double q);

// E|T|^q for T Student-t with `dof` degrees of freedom; requires q < dof.
double student_t_abs_moment(double q, double dof);

}  // namespace rerm::stats
