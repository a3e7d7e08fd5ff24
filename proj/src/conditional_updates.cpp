#include "conditional_updates.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dynamic_effects.hpp"

namespace jdfm {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

}  // namespace

std::vector<double> risk_weight_profile(const DatasetIndex& idx, const ModelParams& params,
                                        std::size_t process, const std::vector<double>& weights) {
  const std::size_t m = idx.m();
  const auto& coeffs = params.coeffs_for(process);
  const auto& beta = params.beta.at(process);
  // Difference array over the constant-history segments of each subject.
  std::vector<double> diff(m + 1, 0.0);
  for (std::size_t i = 0; i < idx.n(); ++i) {
    const SubjectLayout& lay = idx.layout[i];
    if (lay.grid_limit == 0) continue;
    const double base = weights[i] * std::exp(dot(beta, idx.data->subjects[i].covariates));
    for (std::size_t s = 0; s < lay.segments.size(); ++s) {
      const std::size_t begin = lay.segments[s].begin;
      const std::size_t end =
          s + 1 < lay.segments.size() ? lay.segments[s + 1].begin : lay.grid_limit;
      const double w = base * history_factor(lay.segments[s].history, coeffs);
      diff[begin] += w;
      diff[end] -= w;
    }
  }
  std::vector<double> profile(m, 0.0);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    acc += diff[j];
    profile[j] = acc;
  }
  return profile;
}

std::vector<IncrementPosterior> increment_posteriors(const DatasetIndex& idx,
                                                     const ModelParams& params,
                                                     const GammaProcessPrior& prior,
                                                     std::size_t process) {
  const std::size_t m = idx.m();
  std::vector<double> prior_shapes(m, 0.0);
  if (prior.precision > 0.0) prior_shapes = prior_increment_shapes(prior, idx.grid);

  const auto profile = risk_weight_profile(idx, params, process, params.frailties);
  const auto& counts = idx.grid_event_counts.at(process);

  std::vector<IncrementPosterior> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    out[j].shape = counts[j] + prior_shapes[j];
    out[j].rate = prior.precision + profile[j];
    out[j].degenerate = out[j].shape > 0.0 && !(out[j].rate > 0.0);
  }
  return out;
}

std::vector<double> sample_increments(const std::vector<IncrementPosterior>& posteriors, Rng& rng) {
  std::vector<double> draws(posteriors.size(), 0.0);
  for (std::size_t j = 0; j < posteriors.size(); ++j) {
    const auto& p = posteriors[j];
    if (p.degenerate || p.shape <= 0.0) continue;
    draws[j] = rng.gamma(p.shape, p.rate);
  }
  return draws;
}

std::vector<double> mean_increments(const std::vector<IncrementPosterior>& posteriors) {
  std::vector<double> means(posteriors.size(), 0.0);
  for (std::size_t j = 0; j < posteriors.size(); ++j) {
    const auto& p = posteriors[j];
    if (p.degenerate || p.shape <= 0.0) continue;
    means[j] = p.shape / p.rate;
  }
  return means;
}

double posterior_mean_chf(const std::vector<IncrementPosterior>& posteriors, const TimeGrid& grid,
                          double t) {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size() && grid.times[j] <= t; ++j) {
    const auto& p = posteriors[j];
    if (p.degenerate || p.shape <= 0.0) continue;
    acc += p.shape / p.rate;
  }
  return acc;
}

GammaParams frailty_posterior(const DatasetIndex& idx, std::size_t subject,
                              const ModelParams& params, const ExposureCache& cache) {
  double events = 0.0;
  for (std::size_t process = 0; process <= idx.q(); ++process)
    events += idx.subject_event_counts[process][subject];
  return GammaParams{events + params.nu, cache.total(subject) + params.nu};
}

std::vector<double> frailty_posterior_means(const DatasetIndex& idx, const ModelParams& params,
                                            const ExposureCache& cache) {
  std::vector<double> means(idx.n());
  for (std::size_t i = 0; i < idx.n(); ++i)
    means[i] = frailty_posterior(idx, i, params, cache).mean();
  return means;
}

double plug_in_chf(const DatasetIndex& idx, const ModelParams& params,
                   const GammaProcessPrior& prior, std::size_t process, double t) {
  const ExposureCache cache = exposures(idx, params);
  const auto estimates = frailty_posterior_means(idx, params, cache);

  std::vector<double> prior_shapes(idx.m(), 0.0);
  if (prior.precision > 0.0) prior_shapes = prior_increment_shapes(prior, idx.grid);
  const auto profile = risk_weight_profile(idx, params, process, estimates);
  const auto& counts = idx.grid_event_counts.at(process);

  double acc = 0.0;
  for (std::size_t j = 0; j < idx.m() && idx.grid.times[j] <= t; ++j) {
    const double shape = counts[j] + prior_shapes[j];
    const double rate = prior.precision + profile[j];
    if (shape > 0.0 && rate > 0.0) acc += shape / rate;
  }
  return acc;
}

double breslow_aalen(const DatasetIndex& idx, const ModelParams& params, std::size_t process,
                     double t) {
  const auto profile = risk_weight_profile(idx, params, process, params.frailties);
  const auto& counts = idx.grid_event_counts.at(process);
  double acc = 0.0;
  for (std::size_t j = 0; j < idx.m() && idx.grid.times[j] <= t; ++j) {
    if (counts[j] <= 0.0) continue;
    if (!(profile[j] > 0.0)) {
      std::ostringstream os;
      os << "empty risk set at event time " << idx.grid.times[j];
      throw std::runtime_error(os.str());
    }
    acc += counts[j] / profile[j];
  }
  return acc;
}

}  // namespace jdfm
