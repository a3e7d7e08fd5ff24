#include "mcmc_driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace jdfm {

namespace {

std::vector<std::string> default_covariate_names(std::size_t p) {
  std::vector<std::string> names(p);
  for (std::size_t k = 0; k < p; ++k) names[k] = "x" + std::to_string(k + 1);
  return names;
}

}  // namespace

ParamLayout make_layout(std::size_t n_types, std::size_t n_covariates,
                        const std::vector<std::vector<unsigned char>>& alpha_free,
                        const std::vector<std::string>& covariate_names) {
  const auto cov = covariate_names.empty() ? default_covariate_names(n_covariates)
                                           : covariate_names;
  ParamLayout layout;
  layout.nu_col = 0;
  layout.names.push_back("nu");
  layout.beta_span.assign(n_types + 1, {0, 0});
  // Recurrent regression blocks first, terminal last (reporting order).
  for (std::size_t q = 1; q <= n_types; ++q) {
    layout.beta_span[q] = {layout.names.size(), n_covariates};
    for (std::size_t k = 0; k < n_covariates; ++k)
      layout.names.push_back("beta_type" + std::to_string(q) + "_" + cov[k]);
  }
  layout.beta_span[0] = {layout.names.size(), n_covariates};
  for (std::size_t k = 0; k < n_covariates; ++k)
    layout.names.push_back("beta_terminal_" + cov[k]);
  layout.alpha_cols.assign(n_types, {});
  for (std::size_t q = 0; q < n_types; ++q) {
    for (std::size_t l = 0; l < n_types; ++l) {
      if (!alpha_free.at(q).at(l)) continue;
      layout.alpha_cols[q].push_back(layout.names.size());
      layout.names.push_back("alpha_type" + std::to_string(q + 1) + "_type" + std::to_string(l + 1));
    }
  }
  for (std::size_t l = 0; l < n_types; ++l) {
    layout.gamma_cols.push_back(layout.names.size());
    layout.names.push_back("gamma_type" + std::to_string(l + 1));
  }
  return layout;
}

std::vector<double> ChainDraws::frailty_sd() const {
  std::vector<double> sd(frailty_mean.size(), 0.0);
  if (frailty_count >= 2) {
    for (std::size_t i = 0; i < sd.size(); ++i)
      sd[i] = std::sqrt(frailty_m2[i] / static_cast<double>(frailty_count - 1));
  }
  return sd;
}

std::vector<double> PosteriorDraws::column(std::size_t col) const {
  std::vector<double> out;
  for (const ChainDraws& c : chains)
    for (const auto& row : c.scalars) out.push_back(row.at(col));
  return out;
}

std::vector<std::vector<double>> PosteriorDraws::per_chain_column(std::size_t col) const {
  std::vector<std::vector<double>> out;
  for (const ChainDraws& c : chains) {
    std::vector<double> series;
    series.reserve(c.scalars.size());
    for (const auto& row : c.scalars) series.push_back(row.at(col));
    out.push_back(std::move(series));
  }
  return out;
}

std::size_t PosteriorDraws::total_stored() const {
  std::size_t acc = 0;
  for (const ChainDraws& c : chains) acc += c.scalars.size();
  return acc;
}

std::vector<double> default_report_times(const TimeGrid& grid, std::size_t count) {
  std::vector<double> times;
  if (grid.size() == 0) return times;
  const double t_max = grid.times.back();
  times.reserve(count);
  for (std::size_t k = 1; k <= count; ++k)
    times.push_back(t_max * static_cast<double>(k) / static_cast<double>(count));
  return times;
}

ModelParams initialize(const DatasetIndex& idx, const PriorSpec& spec, double jitter, Rng& rng) {
  const std::size_t nq = idx.q();
  const std::size_t p = idx.p();
  ModelParams params;
  params.increments.values.assign(nq + 1, std::vector<double>(idx.m(), 0.0));
  for (std::size_t process = 0; process <= nq; ++process) {
    double prev = 0.0;
    for (std::size_t j = 0; j < idx.m(); ++j) {
      const double cur = spec.process.at(process).mean_chf(idx.grid.times[j]);
      params.increments.values[process][j] = cur - prev;
      prev = cur;
    }
  }
  params.beta.assign(nq + 1, std::vector<double>(p, 0.0));
  for (auto& block : params.beta)
    for (double& v : block) v = jitter * rng.normal();
  params.alpha.assign(nq, DynamicCoeffs{std::vector<double>(nq, 0.0)});
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t l = 0; l < nq; ++l) {
      if (!spec.alpha_free.at(q).at(l)) continue;
      const auto& pr = spec.parametric.alpha.at(q).at(l);
      params.alpha[q].values[l] = rng.gamma(pr.shape, pr.rate);
    }
  }
  params.gamma.values.assign(nq, 0.0);
  for (std::size_t l = 0; l < nq; ++l) {
    const auto& pr = spec.parametric.gamma.at(l);
    params.gamma.values[l] = rng.gamma(pr.shape, pr.rate);
  }
  params.nu = std::exp(jitter * rng.normal());
  params.frailties.assign(idx.n(), 1.0);
  return params;
}

namespace {

DemcPopulation make_population(const std::vector<double>& center, std::size_t members,
                               const DemcSettings& settings, double spread, bool positive,
                               Rng& rng) {
  DemcPopulation pop;
  pop.jitter = settings.jitter;
  pop.mode_jump_every = settings.mode_jump_every;
  pop.members.assign(members, center);
  for (std::size_t m = 1; m < members; ++m) {
    for (double& v : pop.members[m]) {
      if (positive)
        v *= std::exp(spread * rng.normal());
      else
        v += spread * rng.normal();
    }
  }
  return pop;
}

double chf_at(const std::vector<double>& increments, const TimeGrid& grid, double t) {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size() && grid.times[j] <= t; ++j) acc += increments[j];
  return acc;
}

}  // namespace

ChainDraws run_chain(const DatasetIndex& idx, const PriorSpec& spec, const McmcConfig& config,
                     std::size_t chain_index, const std::vector<double>& report_times) {
  if (config.burn_in >= config.iterations)
    throw std::invalid_argument("burn_in must be smaller than iterations");
  if (config.thin == 0) throw std::invalid_argument("thin must be >= 1");

  const std::size_t nq = idx.q();
  Rng rng(config.seed, chain_index);
  ModelParams params = initialize(idx, spec, config.init_jitter, rng);

  {
    const double ll = log_likelihood(idx, params);
    if (!std::isfinite(ll)) {
      std::ostringstream os;
      os << "non-finite log-likelihood at initialization (chain " << chain_index
         << "): n=" << idx.n() << " grid=" << idx.m();
      throw std::runtime_error(os.str());
    }
  }

  // Per-subject event totals across all processes (fixed for the run).
  std::vector<double> event_totals(idx.n(), 0.0);
  for (std::size_t process = 0; process <= nq; ++process)
    for (std::size_t i = 0; i < idx.n(); ++i)
      event_totals[i] += idx.subject_event_counts[process][i];

  // One DEMC population per block: regression blocks, then dynamic blocks.
  std::vector<DemcPopulation> beta_pop(nq + 1);
  for (std::size_t process = 0; process <= nq; ++process) {
    const std::size_t members = config.demc.members > 0
                                    ? config.demc.members
                                    : demc_population_size(idx.p());
    beta_pop[process] =
        make_population(params.beta[process], members, config.demc, 0.1, false, rng);
  }
  std::vector<DemcPopulation> coeff_pop(nq + 1);
  std::vector<CoeffsKernelContext> coeff_shape(nq + 1);
  for (std::size_t process = 0; process <= nq; ++process) {
    coeff_shape[process] = make_coeffs_kernel(idx, params, spec, process);
    const std::size_t dim = coeff_shape[process].dim();
    if (dim == 0) continue;
    std::vector<double> center(dim);
    const std::vector<double>& full =
        process == 0 ? params.gamma.values : params.alpha[process - 1].values;
    for (std::size_t k = 0; k < dim; ++k) center[k] = full[coeff_shape[process].free_components[k]];
    const std::size_t members =
        config.demc.members > 0 ? config.demc.members : demc_population_size(dim);
    coeff_pop[process] = make_population(center, members, config.demc, 0.3, true, rng);
  }

  MhState nu_state;
  nu_state.value = params.nu;
  nu_state.step = config.nu_step;

  ChainDraws out;
  out.frailty_mean.assign(idx.n(), 0.0);
  out.frailty_m2.assign(idx.n(), 0.0);

  const std::size_t stored_target = config.stored_per_chain();
  out.scalars.reserve(stored_target);

  const ParamLayout layout = make_layout(nq, idx.p(), spec.alpha_free);

  for (std::size_t b = 1; b <= config.iterations; ++b) {
    // (a)-(b) baseline hazard increments, recurrent processes then terminal.
    for (std::size_t step = 0; step <= nq; ++step) {
      const std::size_t process = step < nq ? step + 1 : 0;
      const auto posteriors = increment_posteriors(idx, params, spec.process[process], process);
      for (const auto& ip : posteriors)
        if (ip.degenerate) ++out.degenerate_increments;
      params.increments.values[process] = config.hazard_update == UpdateStyle::sample
                                              ? sample_increments(posteriors, rng)
                                              : mean_increments(posteriors);
    }

    // (c) exposures under the fresh hazards and the previous regression /
    // dynamic parameters.
    ExposureCache cache = exposures(idx, params);
    std::vector<double> exposure_totals(idx.n());
    for (std::size_t i = 0; i < idx.n(); ++i) exposure_totals[i] = cache.total(i);

    // (d) frailty precision.
    nu_state.value = params.nu;
    mh_update_nu(
        nu_state,
        [&](double v) { return log_kernel_nu(v, event_totals, exposure_totals, spec.parametric.nu); },
        rng);
    params.nu = nu_state.value;

    // (e) frailties.
    for (std::size_t i = 0; i < idx.n(); ++i) {
      const GammaParams post{event_totals[i] + params.nu, exposure_totals[i] + params.nu};
      params.frailties[i] = config.frailty_update == UpdateStyle::sample
                                ? rng.gamma(post.shape, post.rate)
                                : post.mean();
    }

    // (f)-(g) regression blocks, recurrent then terminal.
    for (std::size_t step = 0; step <= nq && idx.p() > 0; ++step) {
      const std::size_t process = step < nq ? step + 1 : 0;
      const BetaKernelContext kernel = make_beta_kernel(idx, params, spec, process);
      demc_update(beta_pop[process], [&](const std::vector<double>& v) { return kernel(v); }, rng);
      params.beta[process] = beta_pop[process].current();
    }

    // (h)-(i) dynamic blocks, recurrent types then terminal.
    for (std::size_t step = 0; step <= nq; ++step) {
      const std::size_t process = step < nq ? step + 1 : 0;
      if (coeff_shape[process].dim() == 0) continue;
      const CoeffsKernelContext kernel = make_coeffs_kernel(idx, params, spec, process);
      demc_update(coeff_pop[process], [&](const std::vector<double>& v) { return kernel(v); }, rng);
      const std::vector<double> full = kernel.expand(coeff_pop[process].current());
      if (process == 0)
        params.gamma.values = full;
      else
        params.alpha[process - 1].values = full;
    }

    if (b == config.burn_in) nu_state.adapting = false;

    if (b > config.burn_in && (b - config.burn_in) % config.thin == 0) {
      std::vector<double> row(layout.size(), 0.0);
      row[layout.nu_col] = params.nu;
      for (std::size_t process = 0; process <= nq; ++process) {
        const auto [off, len] = layout.beta_span[process];
        for (std::size_t k = 0; k < len; ++k) row[off + k] = params.beta[process][k];
      }
      for (std::size_t q = 0; q < nq; ++q) {
        const auto& cols = layout.alpha_cols[q];
        const auto& frees = coeff_shape[q + 1].free_components;
        for (std::size_t k = 0; k < cols.size(); ++k)
          row[cols[k]] = params.alpha[q].values[frees[k]];
      }
      for (std::size_t l = 0; l < nq; ++l) row[layout.gamma_cols[l]] = params.gamma.values[l];
      out.scalars.push_back(std::move(row));

      std::vector<std::vector<double>> evals(nq + 1, std::vector<double>(report_times.size(), 0.0));
      for (std::size_t process = 0; process <= nq; ++process) {
        // One pass: report_times are sorted.
        const auto& inc = params.increments.values[process];
        double acc = 0.0;
        std::size_t j = 0;
        for (std::size_t k = 0; k < report_times.size(); ++k) {
          while (j < idx.m() && idx.grid.times[j] <= report_times[k]) acc += inc[j++];
          evals[process][k] = acc;
        }
      }
      out.chf_report.push_back(std::move(evals));

      if (config.store_increments) out.increments.push_back(params.increments.values);
      if (config.store_frailty_draws) out.frailty_draws.push_back(params.frailties);
      ++out.frailty_count;
      for (std::size_t i = 0; i < idx.n(); ++i) {
        const double d = params.frailties[i] - out.frailty_mean[i];
        out.frailty_mean[i] += d / static_cast<double>(out.frailty_count);
        out.frailty_m2[i] += d * (params.frailties[i] - out.frailty_mean[i]);
      }
    }
  }

  out.nu_acceptance = nu_state.acceptance_rate();
  for (std::size_t process = 0; process <= nq; ++process)
    out.block_acceptance.push_back(beta_pop[process].acceptance_rate());
  for (std::size_t process = 0; process <= nq; ++process)
    out.block_acceptance.push_back(coeff_pop[process].dim() == 0
                                       ? 0.0
                                       : coeff_pop[process].acceptance_rate());
  return out;
}

PosteriorDraws run_chains(const DatasetIndex& idx, const PriorSpec& spec,
                          const McmcConfig& config) {
  PosteriorDraws draws;
  draws.layout = make_layout(idx.q(), idx.p(), spec.alpha_free);
  draws.report_times =
      config.report_times.empty() ? default_report_times(idx.grid) : config.report_times;
  draws.grid = idx.grid;
  draws.config = config;
  draws.n_subjects = idx.n();
  draws.n_types = idx.q();
  draws.chains.resize(config.n_chains);

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, config.n_chains));
  if (workers == 1) {
    for (std::size_t c = 0; c < config.n_chains; ++c)
      draws.chains[c] = run_chain(idx, spec, config, c, draws.report_times);
    return draws;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::string> errors(config.n_chains);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= config.n_chains) return;
        try {
          draws.chains[c] = run_chain(idx, spec, config, c, draws.report_times);
        } catch (const std::exception& e) {
          errors[c] = e.what();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error("chain failed: " + err);
  return draws;
}

}  // namespace jdfm
