#include "simulator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dynamic_effects.hpp"

namespace jdfm {

namespace {

constexpr std::size_t kRunawayLimit = 10000;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

void check_scenario(const Scenario& s) {
  const std::size_t nq = s.n_types();
  if (nq == 0) throw std::invalid_argument("scenario: needs at least one recurrent type");
  if (!(s.nu_true > 0.0) || !(s.weibull_shape > 0.0) || !(s.terminal_scale > 0.0) ||
      !(s.tau > 0.0))
    throw std::invalid_argument("scenario: shapes, scales, nu, tau must be positive");
  for (double sc : s.recurrent_scales)
    if (!(sc > 0.0)) throw std::invalid_argument("scenario: scales must be positive");
  if (!(s.censor_low <= s.censor_high))
    throw std::invalid_argument("scenario: censor_low must be <= censor_high");
  if (s.alpha_true.size() != nq || s.gamma_true.size() != nq)
    throw std::invalid_argument("scenario: dynamic effect sizes must match n_types");
  for (const auto& row : s.alpha_true)
    if (row.size() != nq) throw std::invalid_argument("scenario: alpha rows must have Q entries");
  if (s.beta_true.size() != nq + 1)
    throw std::invalid_argument("scenario: beta_true needs one vector per process");
  for (const auto& b : s.beta_true)
    if (b.size() != s.covariates.size())
      throw std::invalid_argument("scenario: beta length must match covariate count");
}

}  // namespace

std::vector<std::vector<double>> diagonal_alpha(const std::vector<double>& same_type) {
  const std::size_t nq = same_type.size();
  std::vector<std::vector<double>> a(nq, std::vector<double>(nq, 0.0));
  for (std::size_t q = 0; q < nq; ++q) a[q][q] = same_type[q];
  return a;
}

double weibull_chf(double t, double shape, double scale) {
  if (t <= 0.0) return 0.0;
  return std::pow(t / scale, shape);
}

double weibull_inverse_increment(double current_t, double target, double shape, double scale) {
  const double base = weibull_chf(current_t, shape, scale);
  return scale * std::pow(base + target, 1.0 / shape) - current_t;
}

Subject simulate_subject(const Scenario& scenario, Rng& rng) {
  const std::size_t nq = scenario.n_types();
  Subject subject;
  subject.covariates.reserve(scenario.covariates.size());
  for (const CovariateSpec& spec : scenario.covariates) {
    subject.covariates.push_back(spec.kind == CovariateSpec::Kind::bernoulli
                                     ? static_cast<double>(rng.bernoulli(spec.p))
                                     : rng.normal(spec.mean, spec.sd));
  }
  const double frailty = rng.gamma(scenario.nu_true, scenario.nu_true);
  const double censoring = rng.uniform(scenario.censor_low, scenario.censor_high);
  const double end = std::min(censoring, scenario.tau);
  subject.followup_end = end;
  subject.recurrent_times.assign(nq, {});

  // Per-process fixed parts of the intensity multiplier.
  std::vector<double> linear(nq + 1);
  for (std::size_t process = 0; process <= nq; ++process)
    linear[process] = frailty * std::exp(dot(scenario.beta_true[process], subject.covariates));

  std::vector<double> history(nq, 0.0);
  double now = 0.0;
  std::size_t events = 0;
  for (;;) {
    // Competing clocks: between events every modifier is constant, so each
    // process's next-event gap solves a plain CHF-increment equation; the
    // exponential clocks are redrawn after every event (memorylessness).
    double best_gap = std::numeric_limits<double>::infinity();
    std::size_t best_process = 0;
    for (std::size_t process = 0; process <= nq; ++process) {
      const auto& coeffs =
          process == 0 ? scenario.gamma_true : scenario.alpha_true[process - 1];
      double rho = 1.0;
      for (std::size_t l = 0; l < nq; ++l) rho += history[l] * coeffs[l];
      const double modifier = linear[process] * rho;
      if (!(modifier > 0.0)) continue;
      const double scale =
          process == 0 ? scenario.terminal_scale : scenario.recurrent_scales[process - 1];
      const double gap = weibull_inverse_increment(now, rng.exponential() / modifier,
                                                   scenario.weibull_shape, scale);
      if (gap < best_gap) {
        best_gap = gap;
        best_process = process;
      }
    }
    const double candidate = now + best_gap;
    if (!(candidate <= end)) break;  // censored before the next event
    if (best_process == 0) {
      subject.terminal_time = candidate;
      break;
    }
    subject.recurrent_times[best_process - 1].push_back(candidate);
    history[best_process - 1] += 1.0;
    now = candidate;
    if (++events > kRunawayLimit)
      throw std::runtime_error("simulate_subject: runaway event count (explosive scenario)");
  }
  return subject;
}

Dataset simulate_dataset(const Scenario& scenario, uint64_t seed) {
  check_scenario(scenario);
  Dataset data;
  data.n_types = scenario.n_types();
  data.n_covariates = scenario.covariates.size();
  data.subjects.resize(scenario.n);
  for (std::size_t i = 0; i < scenario.n; ++i) {
    Rng rng(seed, i + 1);
    data.subjects[i] = simulate_subject(scenario, rng);
    data.subjects[i].id = "s" + std::to_string(i + 1);
  }
  validate(data);
  return data;
}

}  // namespace jdfm
