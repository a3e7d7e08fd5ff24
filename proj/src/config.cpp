#include "config.hpp"

#include <cstdio>
#include <stdexcept>

namespace jdfm {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

void check_keys(const Json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known) fail(where, "unknown key \"" + item.key() + "\"");
  }
}

double need_number(const Json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) fail(where, std::string("missing \"") + key + "\"");
  if (!obj[key].is_number()) fail(where, std::string("\"") + key + "\" must be a number");
  return obj[key].get<double>();
}

double opt_number(const Json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(where, std::string("\"") + key + "\" must be a number");
  return obj[key].get<double>();
}

std::size_t opt_index(const Json& obj, const std::string& where, const char* key,
                      std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_unsigned())
    fail(where, std::string("\"") + key + "\" must be a nonnegative integer");
  return obj[key].get<std::size_t>();
}

bool opt_bool(const Json& obj, const std::string& where, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) fail(where, std::string("\"") + key + "\" must be a boolean");
  return obj[key].get<bool>();
}

std::string opt_string(const Json& obj, const std::string& where, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) fail(where, std::string("\"") + key + "\" must be a string");
  return obj[key].get<std::string>();
}

std::vector<double> number_array(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(where, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const Json& j) {
  const std::string where = "scenario";
  check_keys(j, where,
             {"n", "nu", "weibull_shape", "recurrent_scales", "terminal_scale", "alpha", "gamma",
              "beta", "tau", "censoring", "covariates"});
  Scenario s;
  s.n = opt_index(j, where, "n", 100);
  s.nu_true = need_number(j, where, "nu");
  s.weibull_shape = need_number(j, where, "weibull_shape");
  if (!j.contains("recurrent_scales")) fail(where, "missing \"recurrent_scales\"");
  s.recurrent_scales = number_array(j["recurrent_scales"], where + ".recurrent_scales");
  s.terminal_scale = need_number(j, where, "terminal_scale");
  const std::size_t nq = s.recurrent_scales.size();

  if (!j.contains("alpha")) fail(where, "missing \"alpha\"");
  if (j["alpha"].is_object()) {
    check_keys(j["alpha"], where + ".alpha", {"same_type"});
    s.alpha_true = diagonal_alpha(number_array(j["alpha"]["same_type"], where + ".alpha.same_type"));
  } else {
    if (!j["alpha"].is_array()) fail(where + ".alpha", "expected a matrix or {\"same_type\": [...]}");
    for (const auto& row : j["alpha"]) s.alpha_true.push_back(number_array(row, where + ".alpha"));
  }
  if (!j.contains("gamma")) fail(where, "missing \"gamma\"");
  s.gamma_true = number_array(j["gamma"], where + ".gamma");

  if (!j.contains("beta")) fail(where, "missing \"beta\"");
  check_keys(j["beta"], where + ".beta", {"recurrent", "terminal"});
  if (!j["beta"].contains("recurrent") || !j["beta"]["recurrent"].is_array())
    fail(where + ".beta", "missing \"recurrent\" array");
  std::vector<std::vector<double>> recurrent;
  for (const auto& row : j["beta"]["recurrent"])
    recurrent.push_back(number_array(row, where + ".beta.recurrent"));
  if (recurrent.size() != nq) fail(where + ".beta.recurrent", "needs one vector per type");
  if (!j["beta"].contains("terminal")) fail(where + ".beta", "missing \"terminal\"");
  s.beta_true.clear();
  s.beta_true.push_back(number_array(j["beta"]["terminal"], where + ".beta.terminal"));
  for (auto& b : recurrent) s.beta_true.push_back(std::move(b));

  s.tau = need_number(j, where, "tau");
  if (j.contains("censoring")) {
    check_keys(j["censoring"], where + ".censoring", {"low", "high"});
    s.censor_low = need_number(j["censoring"], where + ".censoring", "low");
    s.censor_high = need_number(j["censoring"], where + ".censoring", "high");
  } else {
    s.censor_low = s.censor_high = s.tau;
  }

  if (!j.contains("covariates")) fail(where, "missing \"covariates\"");
  if (!j["covariates"].is_array()) fail(where + ".covariates", "expected an array");
  for (const auto& c : j["covariates"]) {
    const std::string cw = where + ".covariates";
    check_keys(c, cw, {"kind", "p", "mean", "sd"});
    CovariateSpec spec;
    const std::string kind = opt_string(c, cw, "kind", "");
    if (kind == "bernoulli") {
      spec.kind = CovariateSpec::Kind::bernoulli;
      spec.p = opt_number(c, cw, "p", 0.5);
    } else if (kind == "normal") {
      spec.kind = CovariateSpec::Kind::normal;
      spec.mean = opt_number(c, cw, "mean", 0.0);
      spec.sd = opt_number(c, cw, "sd", 1.0);
    } else {
      fail(cw, "\"kind\" must be \"bernoulli\" or \"normal\"");
    }
    s.covariates.push_back(spec);
  }
  return s;
}

McmcConfig parse_mcmc(const Json& j) {
  const std::string where = "mcmc";
  check_keys(j, where,
             {"iterations", "burn_in", "thin", "chains", "hazard_update", "frailty_update",
              "nu_step", "init_jitter", "demc", "store_increments", "store_frailty_draws",
              "report_times"});
  McmcConfig c;
  c.iterations = opt_index(j, where, "iterations", c.iterations);
  c.burn_in = opt_index(j, where, "burn_in", c.burn_in);
  c.thin = opt_index(j, where, "thin", c.thin);
  c.n_chains = opt_index(j, where, "chains", c.n_chains);
  const std::string hazard = opt_string(j, where, "hazard_update", "sample");
  const std::string frailty = opt_string(j, where, "frailty_update", "sample");
  auto style = [&](const std::string& v, const char* key) {
    if (v == "sample") return UpdateStyle::sample;
    if (v == "mean") return UpdateStyle::posterior_mean;
    fail(where, std::string("\"") + key + "\" must be \"sample\" or \"mean\"");
  };
  c.hazard_update = style(hazard, "hazard_update");
  c.frailty_update = style(frailty, "frailty_update");
  c.nu_step = opt_number(j, where, "nu_step", c.nu_step);
  c.init_jitter = opt_number(j, where, "init_jitter", c.init_jitter);
  if (j.contains("demc")) {
    check_keys(j["demc"], where + ".demc", {"members", "jitter", "mode_jump_every"});
    c.demc.members = opt_index(j["demc"], where + ".demc", "members", 0);
    c.demc.jitter = opt_number(j["demc"], where + ".demc", "jitter", c.demc.jitter);
    c.demc.mode_jump_every =
        opt_index(j["demc"], where + ".demc", "mode_jump_every", c.demc.mode_jump_every);
  }
  c.store_increments = opt_bool(j, where, "store_increments", c.store_increments);
  c.store_frailty_draws = opt_bool(j, where, "store_frailty_draws", c.store_frailty_draws);
  if (j.contains("report_times"))
    c.report_times = number_array(j["report_times"], where + ".report_times");
  if (c.thin == 0) fail(where, "\"thin\" must be >= 1");
  if (c.burn_in >= c.iterations) fail(where, "\"burn_in\" must be below \"iterations\"");
  if (c.n_chains == 0) fail(where, "\"chains\" must be >= 1");
  return c;
}

namespace {

MeanChf parse_mean_chf(const Json& j, const std::string& where) {
  check_keys(j, where, {"family", "shape", "scale", "mean"});
  const std::string family = opt_string(j, where, "family", "");
  if (family == "weibull")
    return MeanChf::weibull(need_number(j, where, "shape"), need_number(j, where, "scale"));
  if (family == "exponential") return MeanChf::exponential(need_number(j, where, "mean"));
  fail(where, "\"family\" must be \"weibull\" or \"exponential\"");
}

GammaProcessPrior parse_process_prior(const Json& j, const std::string& where, double t_scale) {
  check_keys(j, where, {"precision", "mean"});
  GammaProcessPrior prior;
  prior.precision = opt_number(j, where, "precision", 0.1);
  if (prior.precision < 0.0) fail(where, "\"precision\" must be >= 0");
  prior.mean_chf =
      j.contains("mean") ? parse_mean_chf(j["mean"], where + ".mean") : MeanChf::exponential(t_scale);
  return prior;
}

NormalPrior parse_normal_prior(const Json& j, const std::string& where, std::size_t p) {
  check_keys(j, where, {"mean", "variance", "covariance"});
  NormalPrior prior;
  if (j.contains("mean")) {
    if (j["mean"].is_number())
      prior.mean.assign(p, j["mean"].get<double>());
    else
      prior.mean = number_array(j["mean"], where + ".mean");
  } else {
    prior.mean.assign(p, 0.0);
  }
  if (prior.mean.size() != p) fail(where + ".mean", "length must match covariate count");
  if (j.contains("covariance")) {
    for (const auto& row : j["covariance"])
      prior.covariance.push_back(number_array(row, where + ".covariance"));
    if (prior.covariance.size() != p) fail(where + ".covariance", "must be p x p");
    for (const auto& row : prior.covariance)
      if (row.size() != p) fail(where + ".covariance", "must be p x p");
  } else if (j.contains("variance")) {
    if (j["variance"].is_number())
      prior.variance.assign(p, j["variance"].get<double>());
    else
      prior.variance = number_array(j["variance"], where + ".variance");
    if (prior.variance.size() != p) fail(where + ".variance", "length must match covariate count");
  } else {
    prior.variance.assign(p, 1.0);
  }
  return prior;
}

std::vector<std::vector<double>> shared_or_matrix(const Json& j, const std::string& where,
                                                  std::size_t rows, std::size_t cols,
                                                  double fallback) {
  if (j.is_null()) return std::vector<std::vector<double>>(rows, std::vector<double>(cols, fallback));
  if (j.is_number())
    return std::vector<std::vector<double>>(rows, std::vector<double>(cols, j.get<double>()));
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(number_array(row, where));
  if (out.size() != rows) fail(where, "matrix row count mismatch");
  for (const auto& row : out)
    if (row.size() != cols) fail(where, "matrix column count mismatch");
  return out;
}

std::vector<double> shared_or_vector(const Json& j, const std::string& where, std::size_t len,
                                     double fallback) {
  if (j.is_null()) return std::vector<double>(len, fallback);
  if (j.is_number()) return std::vector<double>(len, j.get<double>());
  auto out = number_array(j, where);
  if (out.size() != len) fail(where, "vector length mismatch");
  return out;
}

}  // namespace

PriorSpec default_prior_spec(std::size_t n_types, std::size_t n_covariates, double t_scale) {
  return make_prior_spec(Json::object(), n_types, n_covariates, t_scale);
}

PriorSpec make_prior_spec(const Json& priors, std::size_t n_types, std::size_t n_covariates,
                          double t_scale) {
  const std::string where = "priors";
  check_keys(priors, where, {"process", "beta", "alpha", "gamma", "nu"});
  PriorSpec spec;
  spec.process.resize(n_types + 1);
  if (priors.contains("process")) {
    const Json& proc = priors["process"];
    check_keys(proc, where + ".process", {"terminal", "recurrent"});
    if (proc.contains("terminal"))
      spec.process[0] = parse_process_prior(proc["terminal"], where + ".process.terminal", t_scale);
    else
      spec.process[0] = GammaProcessPrior{0.1, MeanChf::exponential(t_scale)};
    if (proc.contains("recurrent")) {
      if (!proc["recurrent"].is_array() || proc["recurrent"].size() != n_types)
        fail(where + ".process.recurrent", "needs one entry per recurrent type");
      for (std::size_t q = 0; q < n_types; ++q)
        spec.process[q + 1] =
            parse_process_prior(proc["recurrent"][q], where + ".process.recurrent", t_scale);
    } else {
      for (std::size_t q = 0; q < n_types; ++q)
        spec.process[q + 1] = GammaProcessPrior{0.1, MeanChf::exponential(t_scale)};
    }
  } else {
    for (std::size_t process = 0; process <= n_types; ++process)
      spec.process[process] = GammaProcessPrior{0.1, MeanChf::exponential(t_scale)};
  }

  spec.parametric.beta.resize(n_types + 1);
  if (priors.contains("beta") && priors["beta"].contains("terminal")) {
    const Json& b = priors["beta"];
    check_keys(b, where + ".beta", {"terminal", "recurrent"});
    spec.parametric.beta[0] =
        parse_normal_prior(b["terminal"], where + ".beta.terminal", n_covariates);
    if (!b.contains("recurrent") || !b["recurrent"].is_array() ||
        b["recurrent"].size() != n_types)
      fail(where + ".beta.recurrent", "needs one entry per recurrent type");
    for (std::size_t q = 0; q < n_types; ++q)
      spec.parametric.beta[q + 1] =
          parse_normal_prior(b["recurrent"][q], where + ".beta.recurrent", n_covariates);
  } else {
    const NormalPrior shared =
        priors.contains("beta")
            ? parse_normal_prior(priors["beta"], where + ".beta", n_covariates)
            : NormalPrior{std::vector<double>(n_covariates, 0.0),
                          std::vector<double>(n_covariates, 1.0),
                          {}};
    for (std::size_t process = 0; process <= n_types; ++process)
      spec.parametric.beta[process] = shared;
  }

  std::string structure = "same_type";
  Json alpha_shape, alpha_rate;
  if (priors.contains("alpha")) {
    const Json& a = priors["alpha"];
    check_keys(a, where + ".alpha", {"structure", "shape", "rate"});
    structure = opt_string(a, where + ".alpha", "structure", structure);
    if (a.contains("shape")) alpha_shape = a["shape"];
    if (a.contains("rate")) alpha_rate = a["rate"];
  }
  if (structure == "same_type")
    spec.alpha_free = same_type_structure(n_types);
  else if (structure == "full")
    spec.alpha_free = full_structure(n_types);
  else
    fail(where + ".alpha.structure", "must be \"same_type\" or \"full\"");
  const auto shapes = shared_or_matrix(alpha_shape, where + ".alpha.shape", n_types, n_types, 0.5);
  const auto rates = shared_or_matrix(alpha_rate, where + ".alpha.rate", n_types, n_types, 2.0);
  spec.parametric.alpha.assign(n_types, std::vector<GammaPrior>(n_types));
  for (std::size_t q = 0; q < n_types; ++q)
    for (std::size_t l = 0; l < n_types; ++l)
      spec.parametric.alpha[q][l] = GammaPrior{shapes[q][l], rates[q][l]};

  Json gamma_shape, gamma_rate;
  if (priors.contains("gamma")) {
    const Json& g = priors["gamma"];
    check_keys(g, where + ".gamma", {"shape", "rate"});
    if (g.contains("shape")) gamma_shape = g["shape"];
    if (g.contains("rate")) gamma_rate = g["rate"];
  }
  const auto gshapes = shared_or_vector(gamma_shape, where + ".gamma.shape", n_types, 0.5);
  const auto grates = shared_or_vector(gamma_rate, where + ".gamma.rate", n_types, 2.0);
  spec.parametric.gamma.resize(n_types);
  for (std::size_t l = 0; l < n_types; ++l)
    spec.parametric.gamma[l] = GammaPrior{gshapes[l], grates[l]};

  spec.parametric.nu = GammaPrior{1.0, 1.0};
  if (priors.contains("nu")) {
    check_keys(priors["nu"], where + ".nu", {"shape", "rate"});
    spec.parametric.nu.shape = opt_number(priors["nu"], where + ".nu", "shape", 1.0);
    spec.parametric.nu.rate = opt_number(priors["nu"], where + ".nu", "rate", 1.0);
  }
  return spec;
}

RunConfig parse_run_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, "top level",
             {"schema_version", "command", "seed", "workers", "out", "scenario", "dataset",
              "priors", "mcmc", "replication", "archive", "report"});
  RunConfig config;
  if (!j.contains("schema_version")) fail("top level", "missing \"schema_version\"");
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
    fail("top level", "unsupported schema_version");
  config.command = opt_string(j, "top level", "command", "");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("top level", "\"seed\" must be a nonnegative integer");
    config.seed = j["seed"].get<uint64_t>();
  }
  config.workers = opt_index(j, "top level", "workers", 1);
  config.out = opt_string(j, "top level", "out", "out");

  if (j.contains("scenario")) {
    config.has_scenario = true;
    config.scenario = parse_scenario(j["scenario"]);
  }
  if (j.contains("dataset")) {
    check_keys(j["dataset"], "dataset", {"subjects", "events", "n_types"});
    config.has_dataset = true;
    config.dataset.subjects = opt_string(j["dataset"], "dataset", "subjects", "");
    config.dataset.events = opt_string(j["dataset"], "dataset", "events", "");
    config.dataset.n_types = opt_index(j["dataset"], "dataset", "n_types", 0);
    if (config.dataset.subjects.empty() || config.dataset.events.empty())
      fail("dataset", "needs \"subjects\" and \"events\" paths");
  }
  if (j.contains("priors")) {
    config.has_priors = true;
    config.priors = j["priors"];
    // Validated fully in make_prior_spec once dimensions are known; key check now.
    check_keys(j["priors"], "priors", {"process", "beta", "alpha", "gamma", "nu"});
  }
  if (j.contains("mcmc")) {
    config.has_mcmc = true;
    config.mcmc = parse_mcmc(j["mcmc"]);
  }
  if (j.contains("replication")) {
    check_keys(j["replication"], "replication", {"replicates", "survival_times", "sensitivity"});
    config.has_replication = true;
    config.replicates = opt_index(j["replication"], "replication", "replicates", 100);
    if (j["replication"].contains("survival_times"))
      config.survival_times =
          number_array(j["replication"]["survival_times"], "replication.survival_times");
    config.sensitivity = opt_bool(j["replication"], "replication", "sensitivity", false);
  }
  config.archive = opt_string(j, "top level", "archive", "");
  if (j.contains("report")) {
    check_keys(j["report"], "report", {"profiles", "processes", "conditional"});
    if (j["report"].contains("profiles"))
      for (const auto& row : j["report"]["profiles"])
        config.report.profiles.push_back(number_array(row, "report.profiles"));
    if (j["report"].contains("processes"))
      for (const auto& v : j["report"]["processes"]) {
        if (!v.is_number_unsigned()) fail("report.processes", "expected process indices");
        config.report.processes.push_back(v.get<std::size_t>());
      }
    config.report.conditional = opt_bool(j["report"], "report", "conditional", false);
  }
  config.canonical = j;
  return config;
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string config_hash(const RunConfig& config) {
  const uint64_t h = fnv1a64(config.canonical.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json provenance_json(const RunConfig& config) {
  return Json{{"version", kVersion}, {"config_hash", config_hash(config)}, {"seed", config.seed}};
}

std::string provenance_comment(const RunConfig& config) {
  return "# jdfm " + std::string(kVersion) + " config=" + config_hash(config) +
         " seed=" + std::to_string(config.seed);
}

}  // namespace jdfm
