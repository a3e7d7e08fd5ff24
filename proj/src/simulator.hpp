#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "event_data.hpp"
#include "rng.hpp"

namespace jdfm {

struct CovariateSpec {
  enum class Kind { bernoulli, normal };
  Kind kind = Kind::bernoulli;
  double p = 0.5;     // bernoulli
  double mean = 0.0;  // normal
  double sd = 1.0;    // normal
};

// Generating design: Weibull baselines sharing one shape, per-process scales,
// dynamic effects, gamma frailty, uniform censoring capped by the study end.
struct Scenario {
  std::size_t n = 100;
  double nu_true = 2.0;
  double weibull_shape = 1.1;                    // common baseline shape
  std::vector<double> recurrent_scales;          // per type
  double terminal_scale = 2.2;
  std::vector<std::vector<double>> alpha_true;   // [type][component], usually diagonal
  std::vector<double> gamma_true;                // terminal dynamic effects
  std::vector<std::vector<double>> beta_true;    // [process 0..Q], 0 = terminal
  double tau = 3.0;                              // administrative study end
  double censor_low = 1.0;
  double censor_high = 3.0;
  std::vector<CovariateSpec> covariates;

  std::size_t n_types() const { return recurrent_scales.size(); }
};

// Convenience: diagonal alpha matrix from per-type same-type effects.
std::vector<std::vector<double>> diagonal_alpha(const std::vector<double>& same_type);

double weibull_chf(double t, double shape, double scale);

// Solves Lambda(t + s) - Lambda(t) = target for s >= 0 in closed form.
double weibull_inverse_increment(double current_t, double target, double shape, double scale);

Subject simulate_subject(const Scenario& scenario, Rng& rng);

// Independent subjects on per-subject substreams; fully determined by seed.
Dataset simulate_dataset(const Scenario& scenario, uint64_t seed);

}  // namespace jdfm
