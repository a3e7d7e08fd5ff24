#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "event_data.hpp"

namespace jdfm {

// Parametric working mean for a cumulative baseline hazard.
struct MeanChf {
  enum class Family { weibull, exponential };
  Family family = Family::exponential;
  double shape = 1.0;  // Weibull only
  double scale = 1.0;  // Weibull scale b in (t/b)^a, or the Exponential mean m in t/m

  double operator()(double t) const;

  static MeanChf weibull(double shape, double scale);
  static MeanChf exponential(double mean);
};

// Gamma-process prior on one baseline CHF: independent gamma increments with
// mean following mean_chf and a precision c scaling the prior weight.
// precision = 0 encodes the weightless limit recovered as Breslow-Aalen; the
// shape computation below rejects it, the conditional updates accept it.
struct GammaProcessPrior {
  double precision = 0.1;  // c
  MeanChf mean_chf;
};

// Per-increment prior shapes c * [mean_chf(t_(j)) - mean_chf(t_(j-1))].
std::vector<double> prior_increment_shapes(const GammaProcessPrior& prior, const TimeGrid& grid);

// Independent (diagonal) or correlated (full covariance) normal prior for a
// regression coefficient block.
struct NormalPrior {
  std::vector<double> mean;
  std::vector<double> variance;                 // diagonal; used when cov empty
  std::vector<std::vector<double>> covariance;  // optional full matrix

  double logpdf(const std::vector<double>& x) const;
  std::vector<double> grad_logpdf(const std::vector<double>& x) const;
};

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;

  // Full log density; -inf for x <= 0 (support sentinel, not an error).
  double logpdf(double x) const;
};

// Everything parametric: regression blocks, dynamic-effect components, and
// the frailty precision nu.
struct ParametricPriors {
  std::vector<NormalPrior> beta;             // [process 0..Q], 0 = terminal
  std::vector<std::vector<GammaPrior>> alpha;  // [recurrent type][component]
  std::vector<GammaPrior> gamma;             // [component]
  GammaPrior nu;
};

// Complete prior specification plus the sampling structure of the dynamic
// blocks: alpha_free[q][l] = 1 iff component l of the type-(q+1) block is
// sampled; fixed components stay at zero and carry no prior term.
struct PriorSpec {
  std::vector<GammaProcessPrior> process;  // [0..Q], 0 = terminal
  ParametricPriors parametric;
  std::vector<std::vector<unsigned char>> alpha_free;

  std::size_t n_types() const { return process.empty() ? 0 : process.size() - 1; }
};

// Same-type restriction: each alpha block frees only its own diagonal component.
std::vector<std::vector<unsigned char>> same_type_structure(std::size_t n_types);
std::vector<std::vector<unsigned char>> full_structure(std::size_t n_types);

double log_prior_beta(const PriorSpec& spec, std::size_t process, const std::vector<double>& beta);
// Dynamic block (process 0 = gamma, q >= 1 = alpha_q); free components only.
double log_prior_coeffs(const PriorSpec& spec, std::size_t process, const std::vector<double>& values);
double log_prior_nu(const PriorSpec& spec, double nu);

}  // namespace jdfm
