#include "replication_harness.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "diagnostics_report.hpp"

namespace jdfm {

PriorSpec study_priors(const Scenario& scenario, const StudyPriors& settings) {
  const std::size_t nq = scenario.n_types();
  const std::size_t p = scenario.covariates.size();
  PriorSpec spec;
  spec.process.resize(nq + 1);
  for (std::size_t process = 0; process <= nq; ++process) {
    GammaProcessPrior& prior = spec.process[process];
    prior.precision = settings.precision;
    if (settings.misspecified) {
      prior.mean_chf = MeanChf::exponential(settings.exponential_means.at(process));
    } else {
      const double scale = process == 0 ? scenario.terminal_scale
                                        : scenario.recurrent_scales[process - 1];
      prior.mean_chf = MeanChf::weibull(scenario.weibull_shape, scale);
    }
  }
  spec.parametric.beta.assign(
      nq + 1, NormalPrior{std::vector<double>(p, 0.0), std::vector<double>(p, settings.beta_variance), {}});
  spec.parametric.alpha.assign(
      nq, std::vector<GammaPrior>(nq, GammaPrior{settings.coeff_shape, settings.coeff_rate}));
  spec.parametric.gamma.assign(nq, GammaPrior{settings.coeff_shape, settings.coeff_rate});
  const double nu_conc = 1.0 / settings.nu_variance;
  spec.parametric.nu = GammaPrior{nu_conc, nu_conc};
  spec.alpha_free = settings.same_type_only ? same_type_structure(nq) : full_structure(nq);
  return spec;
}

std::vector<double> truth_vector(const Scenario& scenario, const ParamLayout& layout) {
  const std::size_t nq = scenario.n_types();
  std::vector<double> truth(layout.size(), 0.0);
  truth[layout.nu_col] = scenario.nu_true;
  for (std::size_t process = 0; process <= nq; ++process) {
    const auto [off, len] = layout.beta_span[process];
    for (std::size_t k = 0; k < len; ++k) truth[off + k] = scenario.beta_true[process][k];
  }
  for (std::size_t q = 0; q < nq; ++q) {
    // Columns follow the free components in order; recover the component
    // index from the parameter name suffix "_type<l>".
    std::size_t seen = 0;
    for (std::size_t l = 0; l < nq && seen < layout.alpha_cols[q].size(); ++l) {
      const std::string want =
          "alpha_type" + std::to_string(q + 1) + "_type" + std::to_string(l + 1);
      const std::size_t col = layout.alpha_cols[q][seen];
      if (layout.names[col] == want) {
        truth[col] = scenario.alpha_true[q][l];
        ++seen;
      }
    }
  }
  for (std::size_t l = 0; l < nq; ++l) truth[layout.gamma_cols[l]] = scenario.gamma_true[l];
  return truth;
}

std::vector<double> truth_survival(const Scenario& scenario, std::size_t process,
                                   const std::vector<double>& times) {
  const double scale =
      process == 0 ? scenario.terminal_scale : scenario.recurrent_scales.at(process - 1);
  const double nu = scenario.nu_true;
  std::vector<double> out(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double chf = weibull_chf(times[k], scenario.weibull_shape, scale);
    out[k] = std::exp(-nu * std::log1p(chf / nu));
  }
  return out;
}

std::vector<double> pointwise_survival_rmse(const std::vector<std::vector<double>>& replicates,
                                            const std::vector<double>& truth) {
  if (replicates.empty()) throw std::invalid_argument("pointwise_survival_rmse: no replicates");
  std::vector<double> out(truth.size(), 0.0);
  for (const auto& curve : replicates) {
    if (curve.size() != truth.size())
      throw std::invalid_argument("pointwise_survival_rmse: grid mismatch");
    for (std::size_t k = 0; k < truth.size(); ++k) {
      const double d = curve[k] - truth[k];
      out[k] += d * d;
    }
  }
  for (double& v : out) v = std::sqrt(v / static_cast<double>(replicates.size()));
  return out;
}

namespace {

std::vector<double> default_survival_times(const Scenario& scenario, std::size_t count = 50) {
  std::vector<double> times(count);
  for (std::size_t k = 1; k <= count; ++k)
    times[k - 1] = scenario.tau * static_cast<double>(k) / static_cast<double>(count);
  return times;
}

FitterFn default_fitter(const Scenario& scenario, const PriorSpec& spec, const McmcConfig& fit,
                        const std::vector<double>& survival_times) {
  return [&scenario, &spec, fit, survival_times](const Dataset& data,
                                                 uint64_t fit_seed) -> ReplicateEstimate {
    McmcConfig config = fit;
    config.seed = fit_seed;
    config.store_increments = false;
    config.report_times = survival_times;
    const DatasetIndex idx = build_index(data);
    const PosteriorDraws draws = run_chains(idx, spec, config);
    const auto rows = summarize(draws);
    ReplicateEstimate est;
    for (const SummaryRow& row : rows) {
      est.names.push_back(row.name);
      est.mean.push_back(row.mean);
      est.lo.push_back(row.lo);
      est.hi.push_back(row.hi);
    }
    const std::vector<double> x0(scenario.covariates.size(), 0.0);
    for (std::size_t process = 0; process <= scenario.n_types(); ++process)
      est.survival.push_back(mean_survival(draws, process, x0));
    return est;
  };
}

}  // namespace

ReplicationReport run_scenario(const Scenario& scenario, const PriorSpec& spec,
                               const McmcConfig& fit, const ReplicationConfig& config,
                               FitterFn fitter) {
  if (config.replicates < 2) throw std::invalid_argument("run_scenario: need >= 2 replicates");

  ReplicationReport report;
  report.replicates = config.replicates;
  report.survival_times = config.survival_times.empty() ? default_survival_times(scenario)
                                                        : config.survival_times;

  if (!fitter) fitter = default_fitter(scenario, spec, fit, report.survival_times);

  const std::size_t nq = scenario.n_types();
  const ParamLayout layout = make_layout(nq, scenario.covariates.size(), spec.alpha_free);
  const std::vector<double> truth = truth_vector(scenario, layout);

  struct Slot {
    bool ok = false;
    ReplicateEstimate est;
    std::string error;
  };
  std::vector<Slot> slots(config.replicates);

  auto run_one = [&](std::size_t r) {
    try {
      const uint64_t data_seed = mix_seed(config.seed, 2 * r);
      const uint64_t fit_seed = mix_seed(config.seed, 2 * r + 1);
      const Dataset data = simulate_dataset(scenario, data_seed);
      slots[r].est = fitter(data, fit_seed);
      if (slots[r].est.names != layout.names)
        throw std::runtime_error("fitter returned a mismatched parameter layout");
      slots[r].ok = true;
    } catch (const std::exception& e) {
      slots[r].error = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, config.workers);
  if (workers == 1) {
    for (std::size_t r = 0; r < config.replicates; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, config.replicates); ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t r = next.fetch_add(1);
          if (r >= config.replicates) return;
          run_one(r);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  for (const Slot& slot : slots) (slot.ok ? report.completed : report.failed)++;
  if (report.completed == 0) throw std::runtime_error("run_scenario: every replicate failed");

  const double count = static_cast<double>(report.completed);
  for (std::size_t col = 0; col < layout.size(); ++col) {
    ReplicationRow row;
    row.name = layout.names[col];
    row.truth = truth[col];
    double mean = 0.0, mse = 0.0, covered = 0.0, width = 0.0;
    for (const Slot& slot : slots) {
      if (!slot.ok) continue;
      const double est = slot.est.mean[col];
      mean += est;
      mse += (est - truth[col]) * (est - truth[col]);
      covered += (slot.est.lo[col] <= truth[col] && truth[col] <= slot.est.hi[col]) ? 1.0 : 0.0;
      width += slot.est.hi[col] - slot.est.lo[col];
    }
    mean /= count;
    row.bias = mean - truth[col];
    row.rmse = std::sqrt(mse / count);
    const double var = std::max(0.0, mse / count - row.bias * row.bias);
    row.sd = std::sqrt(var);
    row.cp = covered / count;
    row.ci_width = width / count;
    report.rows.push_back(std::move(row));
  }

  report.survival_truth.clear();
  report.survival_rmse.clear();
  for (std::size_t process = 0; process <= nq; ++process) {
    report.survival_truth.push_back(truth_survival(scenario, process, report.survival_times));
    std::vector<std::vector<double>> curves;
    for (const Slot& slot : slots)
      if (slot.ok) curves.push_back(slot.est.survival.at(process));
    report.survival_rmse.push_back(
        pointwise_survival_rmse(curves, report.survival_truth.back()));
  }
  return report;
}

std::vector<ReplicationReport> sensitivity_suite(const Scenario& scenario, const McmcConfig& fit,
                                                 const ReplicationConfig& config) {
  struct Arm {
    const char* name;
    double beta_variance;
    double nu_variance;
    bool misspecified;
  };
  const Arm arms[] = {
      {"standard", 1.0, 0.5, false},
      {"strong", 0.25, 0.25, false},
      {"weak", 2.25, 1.0, false},
      {"vague", 9.0, 2.0, false},
      {"misspecified", 1.0, 0.5, true},
  };
  std::vector<ReplicationReport> reports;
  for (const Arm& arm : arms) {
    StudyPriors settings;
    settings.beta_variance = arm.beta_variance;
    settings.nu_variance = arm.nu_variance;
    settings.misspecified = arm.misspecified;
    if (arm.misspecified) {
      settings.precision = 0.01;
      settings.exponential_means.assign(scenario.n_types() + 1, 0.0);
      settings.exponential_means[0] = 13.0;
      for (std::size_t q = 1; q <= scenario.n_types(); ++q)
        settings.exponential_means[q] = 9.0 + static_cast<double>(q);
    }
    const PriorSpec spec = study_priors(scenario, settings);
    ReplicationReport report = run_scenario(scenario, spec, fit, config);
    report.arm = arm.name;
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace jdfm
