#pragma once

namespace fppm {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double reg_lower_gamma(double a, double x);

/// Regularized incomplete beta I_x(a, b), a,b > 0, x in [0,1].
double reg_inc_beta(double a, double b, double x);

/// Chi-squared CDF / quantile with df > 0 degrees of freedom.
double chi2_cdf(double x, double df);
double chi2_quantile(double p, double df);

/// Fisher F CDF / quantile with (d1, d2) degrees of freedom. Large d2 is
/// routed through the chi-squared limit, which is where the denominator
/// degrees of freedom end up after a few thousand pooled iterations anyway.
double f_cdf(double x, double d1, double d2);
double f_quantile(double p, double d1, double d2);

} // namespace fppm
