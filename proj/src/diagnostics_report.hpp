#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mcmc_driver.hpp"

namespace jdfm {

// Split-chain potential scale reduction: every chain halved, then
// sqrt(((n-1)/n * W + B/n) / W) over the resulting sequences. NaN (with the
// caller expected to warn) when the within-chain variance vanishes.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

// Multi-chain effective sample size via autocovariances combined across
// chains, initial-positive-sequence truncation with a monotone envelope.
// Returns the raw value, which may exceed the draw count under negative
// autocorrelation; reports cap it (see DiagnosticsRow).
double effective_sample_size(const std::vector<std::vector<double>>& chains);

// Type-7 (linear interpolation) quantile of a sample; probability in [0, 1].
double quantile(std::vector<double> values, double prob);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;  // posterior SD, reported as "standard error"
  double lo = 0.0;  // 2.5%
  double hi = 0.0;  // 97.5%
  std::optional<double> hazard_ratio;  // exp(mean), regression coefficients only
};

std::vector<SummaryRow> summarize(const PosteriorDraws& draws);

struct DiagnosticsRow {
  std::string name;
  double rhat = 0.0;
  double ess_raw = 0.0;
  double ess = 0.0;           // capped at the total stored draw count
  double ess_fraction = 0.0;  // ess / total stored draws
};

std::vector<DiagnosticsRow> diagnose(const PosteriorDraws& draws);

struct CurveBand {
  std::vector<double> time;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

// Survival for a covariate profile x from the stored draws of one process.
// Marginal (default): per draw S(t) = [nu / (nu + Lambda(t) e^{beta'x})]^nu,
// the gamma-frailty marginalization; conditional (frailty = 1): exp(-Lambda e^{beta'x}).
CurveBand marginal_survival(const PosteriorDraws& draws, std::size_t process,
                            const std::vector<double>& covariates, bool conditional = false);

// Pointwise posterior-mean survival only (no band), for replication metrics.
std::vector<double> mean_survival(const PosteriorDraws& draws, std::size_t process,
                                  const std::vector<double>& covariates, bool conditional = false);

}  // namespace jdfm
