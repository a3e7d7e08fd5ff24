#pragma once

#include <cstddef>
#include <vector>

#include "event_data.hpp"
#include "model_core.hpp"
#include "priors.hpp"
#include "rng.hpp"

namespace jdfm {

// Conditional posterior of one hazard increment: Gamma(shape, rate) with
//   shape = sum_i N_i(dt_j) + c * dLambda*_j,
//   rate  = c + sum_i W_i exp(beta'x_i) Y_i(t_j) rho_i(t_j).
// A degenerate increment (positive shape, zero rate: c = 0 with nobody at
// risk) contributes exactly zero.
struct IncrementPosterior {
  double shape = 0.0;
  double rate = 0.0;
  bool degenerate = false;
};

// The prior precision may be zero here (Breslow-Aalen limit); mean_chf is
// only consulted when precision > 0.
std::vector<IncrementPosterior> increment_posteriors(const DatasetIndex& idx,
                                                     const ModelParams& params,
                                                     const GammaProcessPrior& prior,
                                                     std::size_t process);

std::vector<double> sample_increments(const std::vector<IncrementPosterior>& posteriors, Rng& rng);

std::vector<double> mean_increments(const std::vector<IncrementPosterior>& posteriors);

// Sum of posterior-mean increments at grid times <= t.
double posterior_mean_chf(const std::vector<IncrementPosterior>& posteriors, const TimeGrid& grid,
                          double t);

struct GammaParams {
  double shape = 0.0;
  double rate = 0.0;

  double mean() const { return shape / rate; }
};

// Frailty conditional: Gamma(total events + nu, total exposure + nu); the
// exposure excludes W by construction.
GammaParams frailty_posterior(const DatasetIndex& idx, std::size_t subject,
                              const ModelParams& params, const ExposureCache& cache);

std::vector<double> frailty_posterior_means(const DatasetIndex& idx, const ModelParams& params,
                                            const ExposureCache& cache);

// Plug-in Bayes estimate of the cumulative baseline hazard: the posterior-mean
// CHF with estimated frailties (posterior means under the current parameters)
// substituted for W in every rate.
double plug_in_chf(const DatasetIndex& idx, const ModelParams& params,
                   const GammaProcessPrior& prior, std::size_t process, double t);

// c -> 0 limit: sum over event times <= t of (event count) / (at-risk weight
// sum), weights W_i exp(beta'x_i) rho_i taken from params as given. Errors on
// an event time with an empty risk set.
double breslow_aalen(const DatasetIndex& idx, const ModelParams& params, std::size_t process,
                     double t);

// At-risk weight sum per grid position for one process:
//   sum_i weight_i * exp(beta'x_i) * Y_i(t_j) * rho_i(t_j).
// `weights` is typically the frailty vector (current draws or estimates).
std::vector<double> risk_weight_profile(const DatasetIndex& idx, const ModelParams& params,
                                        std::size_t process, const std::vector<double>& weights);

}  // namespace jdfm
