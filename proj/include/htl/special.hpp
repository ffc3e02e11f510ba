#pragma once

#include <cmath>
#include <stdexcept>

namespace htl {

// Regularized upper incomplete gamma Q(s,x) = Gamma(s,x)/Gamma(s) for integer
// s >= 1: Q(s,x) = e^{-x} sum_{i<s} x^i/i!.
inline double reg_gamma_upper(int s, double x) {
  if (s < 1) throw std::domain_error("reg_gamma_upper: s must be >= 1");
  if (x < 0.0) throw std::domain_error("reg_gamma_upper: x must be >= 0");
  if (x > 745.0) return 0.0;
  double term = 1.0, sum = 1.0;
  for (int i = 1; i < s; ++i) {
    term *= x / i;
    sum += term;
  }
  return std::exp(-x) * sum;
}

// Regularized lower incomplete gamma P(s,x) = 1 - Q(s,x), with a direct series
// for small x where the complement cancels: P = x^s e^{-x}/s! sum_j x^j s!/(s+j)!.
inline double reg_gamma_lower(int s, double x) {
  if (s < 1) throw std::domain_error("reg_gamma_lower: s must be >= 1");
  if (x < 0.0) throw std::domain_error("reg_gamma_lower: x must be >= 0");
  if (x >= s + 1.0) return 1.0 - reg_gamma_upper(s, x);
  double term = std::exp(s * std::log(x) - x - std::lgamma(s + 1.0));
  double sum = term;
  for (int j = 1; j < 500; ++j) {
    term *= x / (s + j);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

// Gamma(s,x) for integer s (unnormalized upper tail).
inline double gamma_upper(int s, double x) {
  double fact = 1.0;
  for (int i = 2; i < s; ++i) fact *= i;
  return fact * reg_gamma_upper(s, x);
}

}  // namespace htl
