#include "model_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jdfm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}
}  // namespace

double HazardIncrements::cumulative(std::size_t process, const TimeGrid& grid, double t) const {
  const auto& inc = values.at(process);
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size() && grid.times[j] <= t; ++j) acc += inc[j];
  return acc;
}

std::vector<double> increment_prefix(const std::vector<double>& increments) {
  std::vector<double> cum(increments.size() + 1, 0.0);
  for (std::size_t j = 0; j < increments.size(); ++j) cum[j + 1] = cum[j] + increments[j];
  return cum;
}

double intensity_factor(const Dataset& data, const TimeGrid& grid, std::size_t subject,
                        std::size_t process, std::size_t grid_index, const ModelParams& params) {
  if (process > data.n_types) throw std::invalid_argument("invalid process index");
  if (grid_index < 1 || grid_index > grid.size())
    throw std::invalid_argument("grid index out of range");
  const Subject& s = data.subjects.at(subject);
  const double t = grid.times[grid_index - 1];
  if (!at_risk(s, t)) return 0.0;
  const double rho = history_factor(history_vector(s, t), params.coeffs_for(process));
  return params.frailties.at(subject) * std::exp(dot(params.beta.at(process), s.covariates)) * rho;
}

ExposureCache exposures(const DatasetIndex& idx, const ModelParams& params) {
  const std::size_t n = idx.n();
  const std::size_t nq = idx.q();
  ExposureCache cache;
  cache.r.assign(n, std::vector<double>(nq + 1, 0.0));
  for (std::size_t process = 0; process <= nq; ++process) {
    const auto cum = increment_prefix(params.increments.values.at(process));
    const auto& coeffs = params.coeffs_for(process);
    const auto& beta = params.beta.at(process);
    for (std::size_t i = 0; i < n; ++i) {
      const SubjectLayout& lay = idx.layout[i];
      double acc = 0.0;
      for (std::size_t s = 0; s < lay.segments.size(); ++s) {
        const std::size_t begin = lay.segments[s].begin;
        const std::size_t end =
            s + 1 < lay.segments.size() ? lay.segments[s + 1].begin : lay.grid_limit;
        acc += history_factor(lay.segments[s].history, coeffs) * (cum[end] - cum[begin]);
      }
      cache.r[i][process] = acc * std::exp(dot(beta, idx.data->subjects[i].covariates));
    }
  }
  return cache;
}

double log_likelihood(const DatasetIndex& idx, const ModelParams& params) {
  const std::size_t nq = idx.q();
  double ll = 0.0;
  for (std::size_t process = 0; process <= nq; ++process) {
    const auto& inc = params.increments.values.at(process);
    const auto& coeffs = params.coeffs_for(process);
    const auto& beta = params.beta.at(process);
    for (const EventRecord& e : idx.events[process]) {
      const double w = params.frailties.at(e.subject);
      const double rho = history_factor(e.history, coeffs);
      const double d = inc.at(e.grid_index);
      if (!(w > 0.0) || !(rho > 0.0) || !(d > 0.0)) return kNegInf;
      ll += std::log(w) + dot(beta, idx.data->subjects[e.subject].covariates) + std::log(rho) +
            std::log(d);
    }
  }
  const ExposureCache cache = exposures(idx, params);
  for (std::size_t i = 0; i < idx.n(); ++i) ll -= params.frailties[i] * cache.total(i);
  return ll;
}

}  // namespace jdfm
