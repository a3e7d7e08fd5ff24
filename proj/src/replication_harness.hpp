#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mcmc_driver.hpp"
#include "priors.hpp"
#include "simulator.hpp"

namespace jdfm {

// Study prior settings: the normal variance for regression blocks, the
// frailty-precision prior expressed through a variance (mapped onto a
// mean-one gamma), dynamic-effect gamma hyperparameters, and the
// gamma-process working means (correct Weibull or misspecified Exponential).
struct StudyPriors {
  double beta_variance = 1.0;  // sigma^2 for every regression coefficient
  double nu_variance = 0.5;    // prior Gamma(1/v, 1/v): mean 1, variance v
  double coeff_shape = 0.5;
  double coeff_rate = 2.0;
  double precision = 0.1;  // gamma-process c for every process
  bool misspecified = false;
  std::vector<double> exponential_means;  // [process 0..Q] when misspecified
  bool same_type_only = true;
};

PriorSpec study_priors(const Scenario& scenario, const StudyPriors& settings);

// What one replicate's fit must deliver for aggregation.
struct ReplicateEstimate {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::vector<double>> survival;  // [process][time], marginal at x = 0
};

using FitterFn = std::function<ReplicateEstimate(const Dataset&, uint64_t fit_seed)>;

struct ReplicationRow {
  std::string name;
  double truth = 0.0;
  double bias = 0.0;
  double sd = 0.0;    // across replicate estimates (population form, so the
                      // identity rmse^2 = bias^2 + sd^2 is exact)
  double rmse = 0.0;
  double cp = 0.0;    // fraction of 95% intervals covering the truth
  double ci_width = 0.0;
};

struct ReplicationReport {
  std::string arm = "standard";
  std::size_t replicates = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::vector<ReplicationRow> rows;
  std::vector<double> survival_times;
  std::vector<std::vector<double>> survival_truth;  // [process][time]
  std::vector<std::vector<double>> survival_rmse;   // [process][time]
};

struct ReplicationConfig {
  std::size_t replicates = 100;
  std::size_t workers = 1;
  uint64_t seed = 1;
  std::vector<double> survival_times;  // empty = 50 points spanning (0, tau]
};

// Truth vector aligned with the scalar draw layout of the fitted model.
std::vector<double> truth_vector(const Scenario& scenario, const ParamLayout& layout);

// Marginal baseline survival under the generating scenario at x = 0.
std::vector<double> truth_survival(const Scenario& scenario, std::size_t process,
                                   const std::vector<double>& times);

// sqrt(mean over replicates of squared pointwise error).
std::vector<double> pointwise_survival_rmse(const std::vector<std::vector<double>>& replicates,
                                            const std::vector<double>& truth);

// Simulate -> fit -> aggregate. `fitter` defaults to the full MCMC pipeline
// under `spec` and `fit`; injectable for stub-based tests.
ReplicationReport run_scenario(const Scenario& scenario, const PriorSpec& spec,
                               const McmcConfig& fit, const ReplicationConfig& config,
                               FitterFn fitter = {});

// The four (beta variance, nu variance) prior arms plus the misspecified
// exponential working-mean arm, each run at the same scenario.
std::vector<ReplicationReport> sensitivity_suite(const Scenario& scenario, const McmcConfig& fit,
                                                 const ReplicationConfig& config);

}  // namespace jdfm
