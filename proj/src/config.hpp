#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcmc_driver.hpp"
#include "priors.hpp"
#include "replication_harness.hpp"
#include "simulator.hpp"
#include "version.hpp"

namespace jdfm {

using Json = nlohmann::json;

struct DatasetPaths {
  std::string subjects;
  std::string events;
  std::size_t n_types = 0;  // 0 = infer from the events file
};

struct ReportSettings {
  std::vector<std::vector<double>> profiles;  // covariate profiles; default: one zero vector
  std::vector<std::size_t> processes;         // default: terminal only
  bool conditional = false;                   // frailty-conditional survival instead of marginal
};

// One parsed configuration document. Sections are optional; each command
// checks for what it needs. Unknown keys anywhere are rejected.
struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string command;  // may also come from the CLI subcommand
  uint64_t seed = 1;
  std::size_t workers = 1;
  std::string out = "out";

  bool has_scenario = false;
  Scenario scenario;
  bool has_dataset = false;
  DatasetPaths dataset;
  bool has_priors = false;
  Json priors;  // materialized once Q and p are known
  bool has_mcmc = false;
  McmcConfig mcmc;
  bool has_replication = false;
  std::size_t replicates = 100;
  std::vector<double> survival_times;
  bool sensitivity = false;
  std::string archive;
  ReportSettings report;

  Json canonical;  // normalized echo of the document, hashed for provenance
};

RunConfig parse_run_config(const std::string& json_text);

Scenario parse_scenario(const Json& j);
McmcConfig parse_mcmc(const Json& j);

// Builds the full prior specification from the "priors" section; shared
// scalars are expanded per component. Every process needs a working-mean CHF;
// defaults (when the section or entries are missing) use an exponential mean
// calibrated so the CHF reaches one at `t_scale`.
PriorSpec make_prior_spec(const Json& priors, std::size_t n_types, std::size_t n_covariates,
                          double t_scale);

PriorSpec default_prior_spec(std::size_t n_types, std::size_t n_covariates, double t_scale);

uint64_t fnv1a64(const std::string& text);

// 16-hex-digit hash of the canonical config document.
std::string config_hash(const RunConfig& config);

Json provenance_json(const RunConfig& config);
std::string provenance_comment(const RunConfig& config);

}  // namespace jdfm
