#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "archive.hpp"
#include "csv.hpp"
#include "dataset_io.hpp"
#include "diagnostics_report.hpp"
#include "replication_harness.hpp"
#include "rng.hpp"
#include "simulator.hpp"

namespace jdfm {

namespace {

void ensure_out(const RunConfig& config) {
  std::filesystem::create_directories(config.out);
}

std::vector<std::string> subject_ids(const Dataset& data) {
  std::vector<std::string> ids;
  ids.reserve(data.subjects.size());
  for (const auto& s : data.subjects) ids.push_back(s.id);
  return ids;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows,
                       const std::string& comment) {
  std::string text = comment + "\n";
  text += "parameter,estimate,standard_error,ci_lower,ci_upper,hazard_ratio\n";
  for (const auto& row : rows) {
    text += csv_join({row.name, format_double(row.mean), format_double(row.sd),
                      format_double(row.lo), format_double(row.hi),
                      row.hazard_ratio ? format_double(*row.hazard_ratio) : ""}) +
            "\n";
  }
  write_text_file(path, text);
}

void write_diagnostics_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows,
                           const std::string& comment) {
  std::string text = comment + "\n";
  text += "parameter,rhat,ess,ess_fraction,ess_raw\n";
  for (const auto& row : rows) {
    text += csv_join({row.name, format_double(row.rhat), format_double(row.ess),
                      format_double(row.ess_fraction), format_double(row.ess_raw)}) +
            "\n";
  }
  write_text_file(path, text);
}

Json survival_report(const RunConfig& config, const PosteriorDraws& draws) {
  std::vector<std::vector<double>> profiles = config.report.profiles;
  if (profiles.empty()) {
    std::size_t p = 0;
    if (!draws.layout.beta_span.empty()) p = draws.layout.beta_span.front().second;
    profiles.push_back(std::vector<double>(p, 0.0));
  }
  std::vector<std::size_t> processes = config.report.processes;
  if (processes.empty()) processes.push_back(0);

  Json curves = Json::array();
  for (const auto& profile : profiles)
    for (std::size_t process : processes) {
      if (process > draws.n_types)
        throw std::invalid_argument("report: process index " + std::to_string(process) +
                                    " out of range");
      const CurveBand band =
          marginal_survival(draws, process, profile, config.report.conditional);
      curves.push_back({{"process", process},
                        {"covariates", profile},
                        {"conditional", config.report.conditional},
                        {"time", band.time},
                        {"mean", band.mean},
                        {"lo", band.lo},
                        {"hi", band.hi}});
    }
  return Json{{"provenance", provenance_json(config)}, {"curves", curves}};
}

// Shared by fit (fresh draws) and report (archived draws).
Json render_outputs(const RunConfig& config, const PosteriorDraws& draws, Json result) {
  const std::string comment = provenance_comment(config);
  const std::string summary_path = config.out + "/summary.csv";
  write_summary_csv(summary_path, summarize(draws), comment);
  result["summary"] = summary_path;

  const std::string diag_path = config.out + "/diagnostics.csv";
  write_diagnostics_csv(diag_path, diagnose(draws), comment);
  result["diagnostics"] = diag_path;

  const std::string survival_path = config.out + "/survival.json";
  write_text_file(survival_path, survival_report(config, draws).dump(2) + "\n");
  result["survival"] = survival_path;
  return result;
}

}  // namespace

Json cmd_simulate(const RunConfig& config) {
  if (!config.has_scenario)
    throw std::invalid_argument("simulate needs a \"scenario\" section");
  ensure_out(config);
  const Dataset data = simulate_dataset(config.scenario, config.seed);
  const std::string subjects_path = config.out + "/subjects.csv";
  const std::string events_path = config.out + "/events.csv";
  save_dataset(data, subjects_path, events_path, default_covariate_names(data.n_covariates),
               provenance_comment(config));

  std::size_t recurrent = 0, terminal = 0;
  for (const auto& s : data.subjects) {
    for (const auto& times : s.recurrent_times) recurrent += times.size();
    if (s.terminal_observed()) ++terminal;
  }
  Json meta{{"provenance", provenance_json(config)},
            {"n", data.size()},
            {"n_types", data.n_types},
            {"n_covariates", data.n_covariates},
            {"recurrent_events", recurrent},
            {"terminal_events", terminal}};
  write_text_file(config.out + "/meta.json", meta.dump(2) + "\n");
  meta["subjects"] = subjects_path;
  meta["events"] = events_path;
  return meta;
}

Json cmd_fit(const RunConfig& config) {
  ensure_out(config);
  Dataset data;
  std::vector<std::string> covariate_names;
  if (config.has_dataset) {
    data = load_dataset(config.dataset.subjects, config.dataset.events, config.dataset.n_types,
                        &covariate_names);
  } else if (config.has_scenario) {
    data = simulate_dataset(config.scenario, mix_seed(config.seed, 0));
    covariate_names = default_covariate_names(data.n_covariates);
  } else {
    throw std::invalid_argument("fit needs a \"dataset\" or \"scenario\" section");
  }

  const DatasetIndex idx = build_index(data);
  const double t_scale = idx.grid.times.empty() ? 1.0 : idx.grid.times.back();
  const PriorSpec spec =
      config.has_priors
          ? make_prior_spec(config.priors, data.n_types, data.n_covariates, t_scale)
          : default_prior_spec(data.n_types, data.n_covariates, t_scale);

  McmcConfig mcmc = config.has_mcmc ? config.mcmc : McmcConfig{};
  mcmc.seed = config.has_dataset ? config.seed : mix_seed(config.seed, 1);
  mcmc.workers = config.workers;

  PosteriorDraws draws = run_chains(idx, spec, mcmc);
  draws.layout = make_layout(data.n_types, data.n_covariates, spec.alpha_free, covariate_names);

  const std::string archive_dir = config.out + "/draws";
  write_draws_archive(archive_dir, draws, subject_ids(data), provenance_json(config),
                      provenance_comment(config));

  Json result{{"archive", archive_dir},
              {"chains", draws.chains.size()},
              {"stored_per_chain", mcmc.stored_per_chain()}};
  return render_outputs(config, draws, std::move(result));
}

Json cmd_replicate(const RunConfig& config) {
  if (!config.has_scenario)
    throw std::invalid_argument("replicate needs a \"scenario\" section");
  ensure_out(config);
  const Scenario& scenario = config.scenario;

  McmcConfig fit = config.has_mcmc ? config.mcmc : McmcConfig{};
  fit.workers = 1;  // parallelism lives across replicates
  ReplicationConfig rep;
  rep.replicates = config.replicates;
  rep.workers = config.workers;
  rep.seed = config.seed;
  rep.survival_times = config.survival_times;

  std::vector<ReplicationReport> reports;
  if (config.sensitivity) {
    reports = sensitivity_suite(scenario, fit, rep);
  } else {
    const PriorSpec spec =
        config.has_priors
            ? make_prior_spec(config.priors, scenario.n_types(),
                              scenario.covariates.size(), scenario.tau)
            : study_priors(scenario, StudyPriors{});
    reports.push_back(run_scenario(scenario, spec, fit, rep));
  }

  const std::string comment = provenance_comment(config);
  std::string table = comment + "\n";
  table += "arm,parameter,n,truth,bias,sd,rmse,cp,ci_width\n";
  for (const auto& report : reports)
    for (const auto& row : report.rows)
      table += csv_join({report.arm, row.name, std::to_string(scenario.n),
                         format_double(row.truth), format_double(row.bias),
                         format_double(row.sd), format_double(row.rmse), format_double(row.cp),
                         format_double(row.ci_width)}) +
               "\n";
  const std::string table_path = config.out + "/replication.csv";
  write_text_file(table_path, table);

  std::string curves = comment + "\n";
  curves += "arm,process,time,truth,rmse\n";
  for (const auto& report : reports)
    for (std::size_t process = 0; process < report.survival_rmse.size(); ++process)
      for (std::size_t t = 0; t < report.survival_times.size(); ++t)
        curves += csv_join({report.arm, std::to_string(process),
                            format_double(report.survival_times[t]),
                            format_double(report.survival_truth[process][t]),
                            format_double(report.survival_rmse[process][t])}) +
                  "\n";
  const std::string curves_path = config.out + "/survival_rmse.csv";
  write_text_file(curves_path, curves);

  Json arms = Json::array();
  for (const auto& report : reports) {
    Json rows = Json::array();
    for (const auto& row : report.rows)
      rows.push_back({{"parameter", row.name},
                      {"truth", row.truth},
                      {"bias", row.bias},
                      {"sd", row.sd},
                      {"rmse", row.rmse},
                      {"cp", row.cp},
                      {"ci_width", row.ci_width}});
    arms.push_back({{"arm", report.arm},
                    {"replicates", report.replicates},
                    {"completed", report.completed},
                    {"failed", report.failed},
                    {"n", scenario.n},
                    {"rows", rows},
                    {"survival_times", report.survival_times},
                    {"survival_truth", report.survival_truth},
                    {"survival_rmse", report.survival_rmse}});
  }
  Json doc{{"provenance", provenance_json(config)}, {"arms", arms}};
  const std::string json_path = config.out + "/replication.json";
  write_text_file(json_path, doc.dump(2) + "\n");

  return Json{{"table", table_path},
              {"survival_rmse", curves_path},
              {"json", json_path},
              {"arms", reports.size()}};
}

Json cmd_diagnose(const RunConfig& config) {
  if (config.archive.empty())
    throw std::invalid_argument("diagnose needs an \"archive\" path");
  ensure_out(config);
  const PosteriorDraws draws = read_draws_archive(config.archive);
  const std::string diag_path = config.out + "/diagnostics.csv";
  write_diagnostics_csv(diag_path, diagnose(draws), provenance_comment(config));
  return Json{{"diagnostics", diag_path},
              {"chains", draws.chains.size()},
              {"parameters", draws.layout.size()}};
}

Json cmd_report(const RunConfig& config) {
  if (config.archive.empty())
    throw std::invalid_argument("report needs an \"archive\" path");
  ensure_out(config);
  const PosteriorDraws draws = read_draws_archive(config.archive);
  Json result{{"archive", config.archive}};
  return render_outputs(config, draws, std::move(result));
}

Json run_command(const RunConfig& config) {
  if (config.command == "simulate") return cmd_simulate(config);
  if (config.command == "fit") return cmd_fit(config);
  if (config.command == "replicate") return cmd_replicate(config);
  if (config.command == "diagnose") return cmd_diagnose(config);
  if (config.command == "report") return cmd_report(config);
  throw std::invalid_argument("unknown command \"" + config.command +
                              "\" (expected simulate|fit|replicate|diagnose|report)");
}

}  // namespace jdfm
