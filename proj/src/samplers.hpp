#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "event_data.hpp"
#include "model_core.hpp"
#include "priors.hpp"
#include "rng.hpp"

namespace jdfm {

// --------------------------------------------------------------------------
// Frailty-precision kernel: with N_i the subject's total event count over all
// processes and r_i its total exposure (frailty excluded),
//   sum_i [lgamma(N_i + nu) - (N_i + nu) ln(r_i + nu)]
//   + n [nu ln nu - lgamma(nu)] + log prior(nu).
double log_kernel_nu(double nu, const std::vector<double>& event_totals,
                     const std::vector<double>& exposure_totals, const GammaPrior& prior);

// Log-scale random-walk Metropolis state for one positive scalar. Step size
// adapts in windows while `adapting` holds (burn-in) and is frozen afterward.
struct MhState {
  double value = 1.0;
  double step = 0.5;  // sd of the proposal on the log scale
  bool adapting = true;
  std::size_t proposals = 0;
  std::size_t accepts = 0;
  std::size_t window_proposals = 0;
  std::size_t window_accepts = 0;

  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepts) / static_cast<double>(proposals);
  }
};

// One proposal value' = value * exp(step * z) accepted with probability
// min(1, exp(K(value') - K(value) + ln value' - ln value)); the log term is
// the Jacobian of the log-scale walk.
void mh_update_nu(MhState& state, const std::function<double(double)>& log_kernel, Rng& rng);

// --------------------------------------------------------------------------
// Block kernels. The fast contexts below precompute everything that stays
// fixed while one block moves; they drop block-constant terms, which is
// harmless because samplers only consume kernel differences.

// Regression block: kernel(beta) = beta' T - sum_i W_i s_i exp(beta' x_i) + log prior,
// with T the covariate sum over the process's events and s_i the subject's
// rho-weighted hazard sum.
struct BetaKernelContext {
  const DatasetIndex* idx = nullptr;
  std::vector<double> event_cov_sum;  // T
  std::vector<double> weighted_base;  // W_i * s_i
  const NormalPrior* prior = nullptr;

  double operator()(const std::vector<double>& beta) const;
};

BetaKernelContext make_beta_kernel(const DatasetIndex& idx, const ModelParams& params,
                                   const PriorSpec& spec, std::size_t process);

// Dynamic-effect block over the free components only. Exposure is linear in
// the coefficients: sum_i W_i exp(beta'x_i) [b0_i + values' bh_i] = A + values' B.
struct CoeffsKernelContext {
  std::size_t process = 0;  // 0 = terminal block
  std::vector<std::size_t> free_components;
  double base_exposure = 0.0;             // A
  std::vector<double> history_exposure;   // B, full length Q
  const std::vector<EventRecord>* events = nullptr;
  const PriorSpec* spec = nullptr;

  std::size_t dim() const { return free_components.size(); }
  std::vector<double> expand(const std::vector<double>& free_values) const;
  // free_values has dim() entries; fixed components are zero.
  double operator()(const std::vector<double>& free_values) const;
};

CoeffsKernelContext make_coeffs_kernel(const DatasetIndex& idx, const ModelParams& params,
                                       const PriorSpec& spec, std::size_t process);

// Reference implementation computed from scratch (exactly the displayed
// conditional kernels, constants included); the fast contexts must agree with
// its differences. `value` is the full block vector.
enum class ParamBlock { beta, coeffs };
double log_kernel_block(const DatasetIndex& idx, const ModelParams& params, const PriorSpec& spec,
                        ParamBlock block, std::size_t process, const std::vector<double>& value);

// --------------------------------------------------------------------------
// Differential Evolution MCMC: a small population per block; proposals move
// one member along the difference of two others.
struct DemcPopulation {
  std::vector<std::vector<double>> members;  // [member][dim]; member 0 is canonical
  double jitter = 1e-4;
  std::size_t mode_jump_every = 10;  // every k-th sweep uses scale 1 for mode jumps
  std::size_t sweeps = 0;
  std::size_t proposals = 0;
  std::size_t accepts = 0;

  std::size_t dim() const { return members.empty() ? 0 : members.front().size(); }
  const std::vector<double>& current() const { return members.front(); }

  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepts) / static_cast<double>(proposals);
  }
};

// Default population size for a block of the given dimension.
std::size_t demc_population_size(std::size_t dim);

// One full population sweep: members updated sequentially, proposals reading
// the current (partially updated) population.
void demc_update(DemcPopulation& pop,
                 const std::function<double(const std::vector<double>&)>& log_kernel, Rng& rng);

}  // namespace jdfm
