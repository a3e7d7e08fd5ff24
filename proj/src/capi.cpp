#include "jdfm.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>

#include "archive.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "dataset_io.hpp"
#include "diagnostics_report.hpp"
#include "model_core.hpp"
#include "simulator.hpp"
#include "version.hpp"

struct jdfm_dataset {
  jdfm::Dataset data;
  std::vector<std::string> covariate_names;
};

struct jdfm_fit {
  jdfm::PosteriorDraws draws;
  std::vector<std::string> subject_ids;
  jdfm::RunConfig config;  // provenance for archive writes
};

namespace {

thread_local std::string g_last_error;

jdfm_status fail(jdfm_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs `body`, translating exceptions into status codes + the thread-local
// message. All entry points funnel through here so nothing ever throws
// across the C boundary.
template <typename Fn>
jdfm_status guarded(Fn&& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    return fail(JDFM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(JDFM_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(JDFM_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(JDFM_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(JDFM_ERR_RUNTIME, "unknown error");
  }
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

jdfm::Json parse_json(const char* text, const char* what) {
  if (text == nullptr) throw std::invalid_argument(std::string(what) + " is null");
  try {
    return jdfm::Json::parse(text);
  } catch (const jdfm::Json::parse_error& e) {
    throw std::invalid_argument(std::string(what) + ": invalid JSON: " + e.what());
  }
}

std::vector<double> json_doubles(const jdfm::Json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw std::invalid_argument(std::string(what) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

jdfm::ModelParams parse_model_params(const jdfm::DatasetIndex& idx, const jdfm::Json& j) {
  const std::size_t nq = idx.q();
  jdfm::ModelParams params;
  if (!j.contains("nu") || !j["nu"].is_number())
    throw std::invalid_argument("params: missing numeric \"nu\"");
  params.nu = j["nu"].get<double>();

  if (j.contains("frailties"))
    params.frailties = json_doubles(j["frailties"], "params.frailties");
  else
    params.frailties.assign(idx.n(), 1.0);
  if (params.frailties.size() != idx.n())
    throw std::invalid_argument("params.frailties: one value per subject required");

  if (!j.contains("beta") || !j["beta"].is_object() || !j["beta"].contains("terminal") ||
      !j["beta"].contains("recurrent"))
    throw std::invalid_argument("params.beta: needs \"terminal\" and \"recurrent\"");
  params.beta.push_back(json_doubles(j["beta"]["terminal"], "params.beta.terminal"));
  if (!j["beta"]["recurrent"].is_array() || j["beta"]["recurrent"].size() != nq)
    throw std::invalid_argument("params.beta.recurrent: one vector per recurrent type required");
  for (const auto& row : j["beta"]["recurrent"])
    params.beta.push_back(json_doubles(row, "params.beta.recurrent"));
  for (const auto& b : params.beta)
    if (b.size() != idx.p())
      throw std::invalid_argument("params.beta: length must match covariate count");

  if (!j.contains("alpha")) throw std::invalid_argument("params: missing \"alpha\"");
  std::vector<std::vector<double>> alpha;
  if (j["alpha"].is_object() && j["alpha"].contains("same_type"))
    alpha = jdfm::diagonal_alpha(json_doubles(j["alpha"]["same_type"], "params.alpha.same_type"));
  else if (j["alpha"].is_array())
    for (const auto& row : j["alpha"]) alpha.push_back(json_doubles(row, "params.alpha"));
  else
    throw std::invalid_argument("params.alpha: matrix or {\"same_type\": [...]} required");
  if (alpha.size() != nq)
    throw std::invalid_argument("params.alpha: one row per recurrent type required");
  for (auto& row : alpha) {
    if (row.size() != nq)
      throw std::invalid_argument("params.alpha: rows must have one entry per type");
    params.alpha.push_back(jdfm::DynamicCoeffs{std::move(row)});
  }

  if (!j.contains("gamma")) throw std::invalid_argument("params: missing \"gamma\"");
  params.gamma.values = json_doubles(j["gamma"], "params.gamma");
  if (params.gamma.values.size() != nq)
    throw std::invalid_argument("params.gamma: one entry per recurrent type required");

  if (!j.contains("increments")) throw std::invalid_argument("params: missing \"increments\"");
  if (!j["increments"].is_array() || j["increments"].size() != nq + 1)
    throw std::invalid_argument("params.increments: (Q+1) rows required, terminal first");
  for (const auto& row : j["increments"])
    params.increments.values.push_back(json_doubles(row, "params.increments"));
  for (const auto& row : params.increments.values)
    if (row.size() != idx.m())
      throw std::invalid_argument("params.increments: rows must match the pooled grid size (" +
                                  std::to_string(idx.m()) + ")");
  return params;
}

}  // namespace

extern "C" {

const char* jdfm_version(void) { return jdfm::kVersion; }

const char* jdfm_last_error(void) { return g_last_error.c_str(); }

void jdfm_string_free(char* text) { ::free(text); }

jdfm_status jdfm_dataset_load(const char* subjects_csv_path, const char* events_csv_path,
                              size_t n_types, jdfm_dataset** out) {
  return guarded([&]() -> jdfm_status {
    if (subjects_csv_path == nullptr || events_csv_path == nullptr || out == nullptr)
      return fail(JDFM_ERR_INVALID_ARGUMENT, "null argument");
    auto handle = std::make_unique<jdfm_dataset>();
    handle->data =
        jdfm::load_dataset(subjects_csv_path, events_csv_path, n_types, &handle->covariate_names);
    *out = handle.release();
    return JDFM_OK;
  });
}

jdfm_status jdfm_dataset_simulate(const char* scenario_json, uint64_t seed, jdfm_dataset** out) {
  return guarded([&]() -> jdfm_status {
    if (out == nullptr) return fail(JDFM_ERR_INVALID_ARGUMENT, "null argument");
    const jdfm::Scenario scenario = jdfm::parse_scenario(parse_json(scenario_json, "scenario"));
    auto handle = std::make_unique<jdfm_dataset>();
    handle->data = jdfm::simulate_dataset(scenario, seed);
    handle->covariate_names = jdfm::default_covariate_names(handle->data.n_covariates);
    *out = handle.release();
    return JDFM_OK;
  });
}

jdfm_status jdfm_dataset_write(const jdfm_dataset* data, const char* subjects_csv_path,
                               const char* events_csv_path) {
  return guarded([&]() -> jdfm_status {
    if (data == nullptr || subjects_csv_path == nullptr || events_csv_path == nullptr)
      return fail(JDFM_ERR_INVALID_ARGUMENT, "null argument");
    jdfm::save_dataset(data->data, subjects_csv_path, events_csv_path, data->covariate_names);
    return JDFM_OK;
  });
}

jdfm_status jdfm_dataset_counts(const jdfm_dataset* data, size_t* n_subjects, size_t* n_types,
                                size_t* n_covariates) {
  return guarded([&]() -> jdfm_status {
    if (data == nullptr) return fail(JDFM_ERR_INVALID_ARGUMENT, "null dataset");
    if (n_subjects != nullptr) *n_subjects = data->data.size();
    if (n_types != nullptr) *n_types = data->data.n_types;
    if (n_covariates != nullptr) *n_covariates = data->data.n_covariates;
    return JDFM_OK;
  });
}

void jdfm_dataset_free(jdfm_dataset* data) { delete data; }

jdfm_status jdfm_log_likelihood(const jdfm_dataset* data, const char* params_json, double* out) {
  return guarded([&]() -> jdfm_status {
    if (data == nullptr || out == nullptr)
      return fail(JDFM_ERR_INVALID_ARGUMENT, "null argument");
    const jdfm::DatasetIndex idx = jdfm::build_index(data->data);
    const jdfm::ModelParams params = parse_model_params(idx, parse_json(params_json, "params"));
    *out = jdfm::log_likelihood(idx, params);
    return JDFM_OK;
  });
}

jdfm_status jdfm_fit_run(const jdfm_dataset* data, const char* config_json, uint64_t seed,
                         size_t workers, jdfm_fit** out) {
  return guarded([&]() -> jdfm_status {
    if (data == nullptr || out == nullptr)
      return fail(JDFM_ERR_INVALID_ARGUMENT, "null argument");
    auto fit = std::make_unique<jdfm_fit>();
    fit->config = jdfm::parse_run_config(config_json == nullptr ? "{\"schema_version\":1}"
                                                                : config_json);
    fit->config.seed = seed;
    fit->config.workers = workers;

    const jdfm::DatasetIndex idx = jdfm::build_index(data->data);
    const double t_scale = idx.grid.times.empty() ? 1.0 : idx.grid.times.back();
    const jdfm::PriorSpec spec =
        fit->config.has_priors
            ? jdfm::make_prior_spec(fit->config.priors, data->data.n_types,
                                    data->data.n_covariates, t_scale)
            : jdfm::default_prior_spec(data->data.n_types, data->data.n_covariates, t_scale);
    jdfm::McmcConfig mcmc = fit->config.has_mcmc ? fit->config.mcmc : jdfm::McmcConfig{};
    mcmc.seed = seed;
    mcmc.workers = workers;

    fit->draws = jdfm::run_chains(idx, spec, mcmc);
    fit->draws.layout = jdfm::make_layout(data->data.n_types, data->data.n_covariates,
                                          spec.alpha_free, data->covariate_names);
    for (const auto& s : data->data.subjects) fit->subject_ids.push_back(s.id);
    *out = fit.release();
    return JDFM_OK;
  });
}

jdfm_status jdfm_fit_write(const jdfm_fit* fit, const char* directory) {
  return guarded([&]() -> jdfm_status {
    if (fit == nullptr || directory == nullptr)
      return fail(JDFM_ERR_INVALID_ARGUMENT, "null argument");
    jdfm::write_draws_archive(directory, fit->draws, fit->subject_ids,
                              jdfm::provenance_json(fit->config),
                              jdfm::provenance_comment(fit->config));
    return JDFM_OK;
  });
}

jdfm_status jdfm_fit_summary_json(const jdfm_fit* fit, char** out) {
  return guarded([&]() -> jdfm_status {
    if (fit == nullptr || out == nullptr)
      return fail(JDFM_ERR_INVALID_ARGUMENT, "null argument");
    jdfm::Json rows = jdfm::Json::array();
    for (const auto& row : jdfm::summarize(fit->draws)) {
      jdfm::Json entry{{"parameter", row.name},
                       {"estimate", row.mean},
                       {"standard_error", row.sd},
                       {"ci_lower", row.lo},
                       {"ci_upper", row.hi}};
      if (row.hazard_ratio) entry["hazard_ratio"] = *row.hazard_ratio;
      rows.push_back(entry);
    }
    jdfm::Json diags = jdfm::Json::array();
    for (const auto& row : jdfm::diagnose(fit->draws))
      diags.push_back({{"parameter", row.name},
                       {"rhat", row.rhat},
                       {"ess", row.ess},
                       {"ess_fraction", row.ess_fraction}});
    const jdfm::Json doc{{"provenance", jdfm::provenance_json(fit->config)},
                         {"summary", rows},
                         {"diagnostics", diags}};
    *out = copy_string(doc.dump(2));
    return JDFM_OK;
  });
}

void jdfm_fit_free(jdfm_fit* fit) { delete fit; }

jdfm_status jdfm_run(const char* config_json, const char* command, const uint64_t* seed,
                     const int32_t* workers, const char* out_dir, char** result_json) {
  return guarded([&]() -> jdfm_status {
    if (config_json == nullptr) return fail(JDFM_ERR_INVALID_ARGUMENT, "null config");
    jdfm::RunConfig config = jdfm::parse_run_config(config_json);
    if (command != nullptr) {
      config.command = command;
      config.canonical["command"] = command;
    }
    if (seed != nullptr) {
      config.seed = *seed;
      config.canonical["seed"] = *seed;
    }
    if (workers != nullptr) {
      if (*workers < 1) return fail(JDFM_ERR_INVALID_ARGUMENT, "workers must be >= 1");
      config.workers = static_cast<size_t>(*workers);
      config.canonical["workers"] = config.workers;
    }
    if (out_dir != nullptr) {
      config.out = out_dir;
      config.canonical["out"] = config.out;
    }
    const jdfm::Json result = jdfm::run_command(config);
    if (result_json != nullptr) *result_json = copy_string(result.dump(2));
    return JDFM_OK;
  });
}

}  // extern "C"
