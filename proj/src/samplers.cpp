#include "samplers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "conditional_updates.hpp"
#include "dynamic_effects.hpp"

namespace jdfm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

}  // namespace

double log_kernel_nu(double nu, const std::vector<double>& event_totals,
                     const std::vector<double>& exposure_totals, const GammaPrior& prior) {
  if (!(nu > 0.0)) return kNegInf;
  const std::size_t n = event_totals.size();
  double acc = static_cast<double>(n) * (nu * std::log(nu) - std::lgamma(nu));
  for (std::size_t i = 0; i < n; ++i) {
    acc += std::lgamma(event_totals[i] + nu) -
           (event_totals[i] + nu) * std::log(exposure_totals[i] + nu);
  }
  return acc + prior.logpdf(nu);
}

void mh_update_nu(MhState& state, const std::function<double(double)>& log_kernel, Rng& rng) {
  const double current = state.value;
  const double proposal = current * std::exp(state.step * rng.normal());
  const double lk_current = log_kernel(current);
  const double lk_proposal = log_kernel(proposal);
  // Jacobian of the log-scale walk: + ln(proposal) - ln(current).
  const double log_ratio = lk_proposal - lk_current + std::log(proposal) - std::log(current);
  ++state.proposals;
  ++state.window_proposals;
  if (std::isfinite(lk_proposal) && std::log(rng.uniform()) < log_ratio) {
    state.value = proposal;
    ++state.accepts;
    ++state.window_accepts;
  }
  if (state.adapting && state.window_proposals >= 50) {
    const double rate =
        static_cast<double>(state.window_accepts) / static_cast<double>(state.window_proposals);
    if (rate < 0.25)
      state.step *= 0.8;
    else if (rate > 0.45)
      state.step *= 1.25;
    state.step = std::min(std::max(state.step, 1e-3), 5.0);
    state.window_proposals = 0;
    state.window_accepts = 0;
  }
}

double BetaKernelContext::operator()(const std::vector<double>& beta) const {
  double acc = dot(beta, event_cov_sum);
  for (std::size_t i = 0; i < idx->n(); ++i) {
    if (weighted_base[i] == 0.0) continue;
    acc -= weighted_base[i] * std::exp(dot(beta, idx->data->subjects[i].covariates));
  }
  return acc + prior->logpdf(beta);
}

BetaKernelContext make_beta_kernel(const DatasetIndex& idx, const ModelParams& params,
                                   const PriorSpec& spec, std::size_t process) {
  BetaKernelContext ctx;
  ctx.idx = &idx;
  ctx.prior = &spec.parametric.beta.at(process);
  ctx.event_cov_sum.assign(idx.p(), 0.0);
  for (const EventRecord& e : idx.events[process]) {
    const auto& x = idx.data->subjects[e.subject].covariates;
    for (std::size_t k = 0; k < x.size(); ++k) ctx.event_cov_sum[k] += x[k];
  }
  const auto cum = increment_prefix(params.increments.values.at(process));
  const auto& coeffs = params.coeffs_for(process);
  ctx.weighted_base.assign(idx.n(), 0.0);
  for (std::size_t i = 0; i < idx.n(); ++i) {
    const SubjectLayout& lay = idx.layout[i];
    double s = 0.0;
    for (std::size_t k = 0; k < lay.segments.size(); ++k) {
      const std::size_t begin = lay.segments[k].begin;
      const std::size_t end =
          k + 1 < lay.segments.size() ? lay.segments[k + 1].begin : lay.grid_limit;
      s += history_factor(lay.segments[k].history, coeffs) * (cum[end] - cum[begin]);
    }
    ctx.weighted_base[i] = params.frailties[i] * s;
  }
  return ctx;
}

std::vector<double> CoeffsKernelContext::expand(const std::vector<double>& free_values) const {
  std::vector<double> full(history_exposure.size(), 0.0);
  for (std::size_t k = 0; k < free_components.size(); ++k)
    full[free_components[k]] = free_values[k];
  return full;
}

double CoeffsKernelContext::operator()(const std::vector<double>& free_values) const {
  const std::vector<double> full = expand(free_values);
  const double prior = log_prior_coeffs(*spec, process, full);
  if (!std::isfinite(prior)) return kNegInf;
  double acc = prior - (base_exposure + dot(full, history_exposure));
  for (const EventRecord& e : *events) {
    const double rho = history_factor_unchecked(e.history, full.data());
    if (!(rho > 0.0)) return kNegInf;
    acc += std::log(rho);
  }
  return acc;
}

CoeffsKernelContext make_coeffs_kernel(const DatasetIndex& idx, const ModelParams& params,
                                       const PriorSpec& spec, std::size_t process) {
  CoeffsKernelContext ctx;
  ctx.process = process;
  ctx.spec = &spec;
  ctx.events = &idx.events[process];
  const std::size_t nq = idx.q();
  if (process == 0) {
    for (std::size_t l = 0; l < nq; ++l) ctx.free_components.push_back(l);
  } else {
    const auto& free = spec.alpha_free.at(process - 1);
    for (std::size_t l = 0; l < nq; ++l)
      if (free[l]) ctx.free_components.push_back(l);
  }

  const auto cum = increment_prefix(params.increments.values.at(process));
  const auto& beta = params.beta.at(process);
  ctx.history_exposure.assign(nq, 0.0);
  for (std::size_t i = 0; i < idx.n(); ++i) {
    const SubjectLayout& lay = idx.layout[i];
    if (lay.grid_limit == 0) continue;
    const double w = params.frailties[i] * std::exp(dot(beta, idx.data->subjects[i].covariates));
    for (std::size_t k = 0; k < lay.segments.size(); ++k) {
      const std::size_t begin = lay.segments[k].begin;
      const std::size_t end =
          k + 1 < lay.segments.size() ? lay.segments[k + 1].begin : lay.grid_limit;
      const double mass = w * (cum[end] - cum[begin]);
      ctx.base_exposure += mass;
      const auto& h = lay.segments[k].history;
      for (std::size_t l = 0; l < nq; ++l) ctx.history_exposure[l] += mass * h[l];
    }
  }
  return ctx;
}

double log_kernel_block(const DatasetIndex& idx, const ModelParams& params, const PriorSpec& spec,
                        ParamBlock block, std::size_t process, const std::vector<double>& value) {
  ModelParams trial = params;
  if (block == ParamBlock::beta) {
    trial.beta.at(process) = value;
  } else {
    // Fixed components sit at exactly zero; only negatives leave the support.
    for (double v : value)
      if (v < 0.0) return kNegInf;
    if (process == 0)
      trial.gamma.values = value;
    else
      trial.alpha.at(process - 1).values = value;
  }
  const ExposureCache cache = exposures(idx, trial);
  double acc = 0.0;
  const auto& inc = trial.increments.values.at(process);
  const auto& coeffs = trial.coeffs_for(process);
  for (const EventRecord& e : idx.events[process]) {
    if (block == ParamBlock::beta) {
      acc += dot(value, idx.data->subjects[e.subject].covariates);
    } else {
      const double rho = history_factor(e.history, coeffs);
      const double d = inc.at(e.grid_index);
      if (!(rho > 0.0) || !(d > 0.0)) return kNegInf;
      acc += std::log(rho * d);
    }
  }
  for (std::size_t i = 0; i < idx.n(); ++i)
    acc -= params.frailties[i] * cache.r[i][process];
  if (block == ParamBlock::beta) return acc + log_prior_beta(spec, process, value);
  return acc + log_prior_coeffs(spec, process, value);
}

std::size_t demc_population_size(std::size_t dim) { return std::max<std::size_t>(8, 2 * dim); }

void demc_update(DemcPopulation& pop,
                 const std::function<double(const std::vector<double>&)>& log_kernel, Rng& rng) {
  const std::size_t count = pop.members.size();
  const std::size_t dim = pop.dim();
  if (count < 4) throw std::invalid_argument("demc_update: population too small");

  // The conditioning blocks move between sweeps, so cached kernel values are
  // stale by construction; refresh them up front.
  std::vector<double> lp(count);
  for (std::size_t i = 0; i < count; ++i) lp[i] = log_kernel(pop.members[i]);

  const bool mode_jump = pop.mode_jump_every > 0 && (pop.sweeps + 1) % pop.mode_jump_every == 0;
  const double g = mode_jump ? 1.0 : 2.38 / std::sqrt(2.0 * static_cast<double>(dim));

  std::vector<double> proposal(dim);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t a = rng.integer(count);
    while (a == i) a = rng.integer(count);
    std::size_t b = rng.integer(count);
    while (b == i || b == a) b = rng.integer(count);
    for (std::size_t k = 0; k < dim; ++k) {
      proposal[k] = pop.members[i][k] + g * (pop.members[a][k] - pop.members[b][k]) +
                    pop.jitter * rng.normal();
    }
    const double lp_prop = log_kernel(proposal);
    ++pop.proposals;
    if (std::isfinite(lp_prop) && std::log(rng.uniform()) < lp_prop - lp[i]) {
      pop.members[i] = proposal;
      lp[i] = lp_prop;
      ++pop.accepts;
    }
  }
  ++pop.sweeps;
}

}  // namespace jdfm
