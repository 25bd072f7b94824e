#pragma once

namespace scclg {

/// log|Gamma(x)| via the Lanczos approximation (g = 7, 9 coefficients),
/// with reflection below 0.5.
double log_gamma(double x);

/// d/dx log Gamma(x).
double digamma(double x);

double sigmoid(double x);

}  // namespace scclg
