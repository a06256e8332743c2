#pragma once

namespace fpvio {

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Chi-square CDF with k degrees of freedom.
double chi2_cdf(double x, double k);

/// Chi-square quantile (inverse CDF), p in (0, 1).
double chi2_quantile(double p, double k);

}  // namespace fpvio
