#include "mlc/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace mlc {

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Continued fraction for I_x(a,b), modified Lentz algorithm.
// https://en.wikipedia.org/wiki/Beta_function#Incomplete_beta_function
double incomplete_beta_cf(double x, double a, double b) {
    constexpr double tiny = 1e-300;
    constexpr double tol = 1e-15;
    constexpr int max_terms = 100000;

    auto numer = [x, a, b](int n) {
        if (n % 2 == 0) {
            const double m = n / 2;
            return m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
        }
        const double m = (n - 1) / 2;
        return -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
    };

    double f = 1.0;  // leading denominator of the fraction
    double c = f;
    double d = 0.0;
    for (int n = 1; n < max_terms; ++n) {
        const double an = numer(n);
        d = 1.0 + an * d;
        if (d == 0.0) d = tiny;
        c = 1.0 + an / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double mult = c * d;
        f *= mult;
        if (std::fabs(mult - 1.0) <= tol) break;
    }
    return f;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("regularized_incomplete_beta: a, b must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("regularized_incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    // The fraction converges fast only below the central cut; use symmetry above.
    if (x <= (a + 1.0) / (a + b + 2.0))
        return front / (a * incomplete_beta_cf(x, a, b));
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) /
                     (b * incomplete_beta_cf(1.0 - x, b, a));
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw std::invalid_argument("student_t_cdf: dof must be positive");
    if (t == 0.0) return 0.5;
    const double x = dof / (dof + t * t);
    const double half_tail = 0.5 * regularized_incomplete_beta(x, dof / 2.0, 0.5);
    return t > 0.0 ? 1.0 - half_tail : half_tail;
}

double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0))
        throw std::invalid_argument("student_t_two_sided_p: dof must be positive");
    const double x = dof / (dof + t * t);
    return regularized_incomplete_beta(x, dof / 2.0, 0.5);
}

}  // namespace mlc
