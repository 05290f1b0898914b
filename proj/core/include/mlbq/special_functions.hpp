#pragma once

namespace mlbq {

// exp(x^2) * erfc(x), finite for all x >= -26.
double erfcx(double x);

double normal_cdf(double x);

// Inverse of normal_cdf on (0, 1). Absolute error below 1e-12 for p in [1e-300, 1 - 1e-16].
double normal_quantile(double p);

}  // namespace mlbq
