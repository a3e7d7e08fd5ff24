#pragma once

#include <cstddef>
#include <vector>

#include "dynamic_effects.hpp"
#include "event_data.hpp"

namespace jdfm {

// Baseline cumulative-hazard increments for every process on the pooled grid.
// Process 0 is the terminal event, 1..Q the recurrent types; the cumulative
// function is the nondecreasing step function jumping at grid times.
struct HazardIncrements {
  std::vector<std::vector<double>> values;  // [process][grid position]

  double cumulative(std::size_t process, const TimeGrid& grid, double t) const;
};

// Every unknown of the model in one bundle.
struct ModelParams {
  HazardIncrements increments;
  std::vector<std::vector<double>> beta;  // [process 0..Q][covariate], 0 = terminal
  std::vector<DynamicCoeffs> alpha;       // [recurrent type - 1]
  DynamicCoeffs gamma;                    // terminal dynamic effects
  double nu = 1.0;                        // frailty precision, W ~ Gamma(nu, nu)
  std::vector<double> frailties;          // [subject], all > 0

  const DynamicCoeffs& coeffs_for(std::size_t process) const {
    return process == 0 ? gamma : alpha.at(process - 1);
  }
};

// Exposure sums r[subject][process] = exp(beta' x) * sum_j Y(t_j) rho(t_j) dLambda_j.
// The frailty W is deliberately excluded; consumers multiply it in themselves.
struct ExposureCache {
  std::vector<std::vector<double>> r;  // [subject][process 0..Q]

  double total(std::size_t subject) const {
    double acc = 0.0;
    for (double v : r[subject]) acc += v;
    return acc;
  }
};

// W * exp(beta' x) * Y(t_(j)) * rho(history(t_(j)-)); the multiplier of the
// baseline increment in the intensity. grid_index is 1-based.
double intensity_factor(const Dataset& data, const TimeGrid& grid, std::size_t subject,
                        std::size_t process, std::size_t grid_index, const ModelParams& params);

ExposureCache exposures(const DatasetIndex& idx, const ModelParams& params);

// Log of the discrete likelihood over the pooled grid: per process,
//   sum_events log[W exp(beta'x) rho dLambda] - sum_i W_i r_i(process).
// An observed event with zero hazard increment yields -inf (sentinel, not an
// error); no-event grid points with zero increment contribute nothing.
double log_likelihood(const DatasetIndex& idx, const ModelParams& params);

// Per-process prefix sums: cum[j] = sum of the first j increments, cum[0] = 0.
std::vector<double> increment_prefix(const std::vector<double>& increments);

}  // namespace jdfm
