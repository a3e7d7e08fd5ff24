#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace jdfm {

// Nonnegative weights turning past-event counts into an intensity multiplier:
// one weight per recurrent event type.
struct DynamicCoeffs {
  std::vector<double> values;
};

// rho(history) = 1 + history . coeffs, always >= 1 on the valid domain.
// The linear form is the only one implemented; this function is the seam
// where alternative history functions would plug in.
inline double history_factor(const std::vector<double>& history, const DynamicCoeffs& coeffs) {
  if (history.size() != coeffs.values.size())
    throw std::invalid_argument("history_factor: length mismatch");
  double acc = 1.0;
  for (std::size_t k = 0; k < history.size(); ++k) {
    if (coeffs.values[k] < 0.0)
      throw std::invalid_argument("history_factor: negative coefficient");
    acc += history[k] * coeffs.values[k];
  }
  return acc;
}

// Same linear form without domain checks, for sampler kernels that probe
// candidate coefficients and handle out-of-support values themselves.
inline double history_factor_unchecked(const std::vector<double>& history, const double* coeffs) {
  double acc = 1.0;
  for (std::size_t k = 0; k < history.size(); ++k) acc += history[k] * coeffs[k];
  return acc;
}

}  // namespace jdfm
