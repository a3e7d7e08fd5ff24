#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "conditional_updates.hpp"
#include "event_data.hpp"
#include "model_core.hpp"
#include "priors.hpp"
#include "samplers.hpp"

namespace jdfm {

// Closed-form blocks can be advanced by a proper Gibbs draw or by pinning
// them at their conditional posterior mean (fast approximate mode; flagged in
// all outputs).
enum class UpdateStyle { sample, posterior_mean };

struct DemcSettings {
  std::size_t members = 0;  // 0 = automatic (max(8, 2 * dim))
  double jitter = 1e-4;
  std::size_t mode_jump_every = 10;
};

struct McmcConfig {
  std::size_t iterations = 2500;
  std::size_t burn_in = 1000;
  std::size_t thin = 5;
  std::size_t n_chains = 1;
  uint64_t seed = 1;
  std::size_t workers = 1;
  UpdateStyle hazard_update = UpdateStyle::sample;
  UpdateStyle frailty_update = UpdateStyle::sample;
  DemcSettings demc;
  double nu_step = 0.5;        // initial log-scale proposal sd
  double init_jitter = 0.1;    // chain-specific initialization dispersion
  bool store_increments = true;
  bool store_frailty_draws = false;
  std::vector<double> report_times;  // CHF evaluation grid; empty = automatic

  std::size_t stored_per_chain() const {
    return iterations > burn_in ? (iterations - burn_in) / thin : 0;
  }
};

// Column layout of the stored scalar draws.
struct ParamLayout {
  std::vector<std::string> names;
  std::size_t nu_col = 0;
  std::vector<std::pair<std::size_t, std::size_t>> beta_span;  // [process] -> (offset, len)
  std::vector<std::vector<std::size_t>> alpha_cols;  // [type][free slot] -> column
  std::vector<std::size_t> gamma_cols;               // [component] -> column

  std::size_t size() const { return names.size(); }
};

ParamLayout make_layout(std::size_t n_types, std::size_t n_covariates,
                        const std::vector<std::vector<unsigned char>>& alpha_free,
                        const std::vector<std::string>& covariate_names = {});

struct ChainDraws {
  std::vector<std::vector<double>> scalars;  // [stored][column]
  // Cumulative hazards evaluated at the report times, per stored draw.
  std::vector<std::vector<std::vector<double>>> chf_report;  // [stored][process][time]
  // Full-fidelity increment draws (optional).
  std::vector<std::vector<std::vector<double>>> increments;  // [stored][process][grid pos]
  std::vector<std::vector<double>> frailty_draws;            // optional [stored][subject]
  // Running per-subject moments of the stored frailty draws.
  std::vector<double> frailty_mean;
  std::vector<double> frailty_m2;
  std::size_t frailty_count = 0;

  double nu_acceptance = 0.0;
  std::vector<double> block_acceptance;  // beta blocks then dynamic blocks
  std::size_t degenerate_increments = 0;

  std::vector<double> frailty_sd() const;
};

struct PosteriorDraws {
  ParamLayout layout;
  std::vector<double> report_times;
  TimeGrid grid;
  std::vector<ChainDraws> chains;
  McmcConfig config;
  std::size_t n_subjects = 0;
  std::size_t n_types = 0;

  // All chains concatenated, one column.
  std::vector<double> column(std::size_t col) const;
  std::vector<std::vector<double>> per_chain_column(std::size_t col) const;
  std::size_t total_stored() const;
};

// Initialization: hazard increments at the prior working-mean differences,
// beta near zero, dynamic coefficients drawn from their priors, nu near one,
// frailties at one. `jitter` disperses chains for honest convergence checks.
ModelParams initialize(const DatasetIndex& idx, const PriorSpec& spec, double jitter, Rng& rng);

ChainDraws run_chain(const DatasetIndex& idx, const PriorSpec& spec, const McmcConfig& config,
                     std::size_t chain_index, const std::vector<double>& report_times);

PosteriorDraws run_chains(const DatasetIndex& idx, const PriorSpec& spec, const McmcConfig& config);

// Default report grid: equally spaced times spanning the pooled event grid.
std::vector<double> default_report_times(const TimeGrid& grid, std::size_t count = 50);

}  // namespace jdfm
