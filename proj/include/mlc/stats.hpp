#pragma once

namespace mlc {

/// ln B(a, b) through lgamma.
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b), evaluated with the textbook
/// continued fraction under the modified Lentz algorithm (switching to the
/// symmetric tail when x is past the central cut). Accurate to better than
/// 1e-10 over the arguments the t-distribution needs; requires a, b > 0 and
/// x in [0, 1].
double regularized_incomplete_beta(double x, double a, double b);

/// CDF of Student's t with `dof` degrees of freedom,
/// via I_{v/(v+t^2)}(v/2, 1/2).
double student_t_cdf(double t, double dof);

/// Two-sided tail probability 2 * (1 - CDF(|t|)).
double student_t_two_sided_p(double t, double dof);

}  // namespace mlc
