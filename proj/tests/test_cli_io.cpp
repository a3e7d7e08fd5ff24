#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "archive.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "dataset_io.hpp"
#include "event_data.hpp"
#include "mcmc_driver.hpp"
#include "rng.hpp"

using namespace jdfm;
using doctest::Approx;

namespace {

const std::string kFixtures = JDFM_FIXTURES_DIR;

std::string temp_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("jdfm_cli_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string write_temp(const std::string& dir, const std::string& name,
                       const std::string& content) {
  const std::string path = dir + "/" + name;
  write_text_file(path, content);
  return path;
}

Json scenario_json(std::size_t n) {
  Json covariates = Json::array();
  covariates.push_back(Json{{"kind", "bernoulli"}, {"p", 0.5}});
  covariates.push_back(Json{{"kind", "normal"}, {"mean", 0.0}, {"sd", 1.0}});
  Json beta;
  beta["terminal"] = Json::array({-0.10, 0.10});
  beta["recurrent"] = Json::array();
  beta["recurrent"].push_back(Json::array({-0.40, 0.35}));
  beta["recurrent"].push_back(Json::array({-0.30, 0.25}));
  beta["recurrent"].push_back(Json::array({-0.20, 0.15}));
  Json s;
  s["n"] = n;
  s["nu"] = 2.0;
  s["weibull_shape"] = 1.1;
  s["recurrent_scales"] = Json::array({1.2, 1.3, 1.4});
  s["terminal_scale"] = 2.2;
  s["tau"] = 3.0;
  s["censoring"] = Json{{"low", 1.0}, {"high", 3.0}};
  s["alpha"] = Json{{"same_type", Json::array({0.35, 0.30, 0.25})}};
  s["gamma"] = Json::array({0.20, 0.15, 0.10});
  s["beta"] = beta;
  s["covariates"] = covariates;
  return s;
}

Json base_config(const std::string& command, const std::string& out, uint64_t seed) {
  Json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["seed"] = seed;
  j["out"] = out;
  return j;
}

Json tiny_mcmc() {
  Json m;
  m["iterations"] = 60;
  m["burn_in"] = 20;
  m["thin"] = 4;
  m["chains"] = 2;
  return m;
}

std::string first_line(const std::string& path) {
  const std::string text = read_text_file(path);
  return text.substr(0, text.find('\n'));
}

// Synthetic posterior draws with iid scalar columns, CHF blocks, increments,
// and frailty moments: exercises every archive file kind.
PosteriorDraws synthetic_draws(std::size_t n_chains, std::size_t stored, uint64_t seed) {
  PosteriorDraws draws;
  draws.layout = make_layout(2, 2, same_type_structure(2));
  draws.report_times = {1.0, 2.0};
  draws.grid.times = {0.5, 1.0, 1.5};
  draws.n_types = 2;
  draws.n_subjects = 3;
  draws.config.iterations = 2 * stored;
  draws.config.burn_in = stored;
  draws.config.thin = 1;
  draws.config.n_chains = n_chains;
  draws.config.seed = seed;
  draws.config.store_increments = true;
  draws.config.report_times = draws.report_times;

  const std::size_t n_params = draws.layout.size();
  Rng rng(seed);
  for (std::size_t k = 0; k < n_chains; ++k) {
    ChainDraws chain;
    chain.frailty_mean.assign(3, 0.0);
    chain.frailty_m2.assign(3, 0.0);
    for (std::size_t s = 0; s < stored; ++s) {
      std::vector<double> row(n_params);
      for (std::size_t c = 0; c < n_params; ++c)
        row[c] = rng.normal(0.3 * static_cast<double>(c + 1), 1.0);
      chain.scalars.push_back(std::move(row));
      std::vector<std::vector<double>> chf(3);
      std::vector<std::vector<double>> inc(3);
      for (std::size_t process = 0; process < 3; ++process) {
        const double base = rng.gamma(2.0, 2.0);
        chf[process] = {base, base * 1.7};
        inc[process] = {0.4 * base, 0.35 * base, 0.25 * base};
      }
      chain.chf_report.push_back(std::move(chf));
      chain.increments.push_back(std::move(inc));
      for (std::size_t i = 0; i < 3; ++i) {
        const double w = rng.gamma(4.0, 4.0);
        ++chain.frailty_count;
        const double delta = w - chain.frailty_mean[i];
        chain.frailty_mean[i] += delta / static_cast<double>(s + 1);
        chain.frailty_m2[i] += delta * (w - chain.frailty_mean[i]);
      }
    }
    chain.frailty_count = stored;
    chain.nu_acceptance = 0.25 + 0.1 * static_cast<double>(k);
    chain.block_acceptance = {0.3, 0.4, 0.35, 0.28, 0.33, 0.31};
    chain.degenerate_increments = k;
    draws.chains.push_back(std::move(chain));
  }
  return draws;
}

}  // namespace

TEST_CASE("fixture dataset loads with names, events, and censoring intact") {
  std::vector<std::string> names;
  const Dataset data =
      load_dataset(kFixtures + "/subjects.csv", kFixtures + "/events.csv", 0, &names);

  CHECK(data.size() == 2);
  CHECK(data.n_types == 2);
  CHECK(data.n_covariates == 2);
  CHECK(names == std::vector<std::string>{"x1", "x2"});

  const Subject& a = data.subjects[0];
  CHECK(a.id == "a");
  CHECK(a.covariates == std::vector<double>{1.0, 0.5});
  CHECK(a.followup_end == 3.0);
  REQUIRE(a.terminal_time.has_value());
  CHECK(*a.terminal_time == 2.5);
  CHECK(a.terminal_observed());
  CHECK(a.risk_end() == 2.5);
  CHECK(a.recurrent_times[0] == std::vector<double>{1.0, 2.0});
  CHECK(a.recurrent_times[1] == std::vector<double>{2.5});

  const Subject& b = data.subjects[1];
  CHECK(b.id == "b");
  CHECK(b.covariates == std::vector<double>{0.0, -0.25});
  CHECK_FALSE(b.terminal_time.has_value());
  CHECK(b.risk_end() == 2.0);
  CHECK(b.recurrent_times[0].empty());
  CHECK(b.recurrent_times[1] == std::vector<double>{1.5});

  SUBCASE("a larger type hint widens the type count") {
    const Dataset wide = load_dataset(kFixtures + "/subjects.csv", kFixtures + "/events.csv", 4);
    CHECK(wide.n_types == 4);
    CHECK(wide.subjects[0].recurrent_times.size() == 4);
    CHECK(wide.subjects[0].recurrent_times[3].empty());
  }
}

TEST_CASE("load errors carry the file path and 1-based row number") {
  const std::string dir = temp_dir("load_errors");
  const std::string good_subjects =
      "id,x1,followup_end,terminal_time\na,1,2,\nb,0,3,2.5\n";
  const std::string good_events = "id,event_type,time\na,1,1.5\n";
  const std::string subjects = write_temp(dir, "subjects.csv", good_subjects);
  const std::string events = write_temp(dir, "events.csv", good_events);

  SUBCASE("valid baseline loads") {
    const Dataset data = load_dataset(subjects, events);
    CHECK(data.size() == 2);
    CHECK(data.n_types == 1);
  }
  SUBCASE("bad subjects header") {
    const std::string bad = write_temp(dir, "bad_header.csv", "id,x1,end,terminal_time\na,1,2,\n");
    CHECK_THROWS_WITH_AS(
        load_dataset(bad, events),
        doctest::Contains("row 1: header must be id,<covariates...>,followup_end,terminal_time"),
        std::runtime_error);
  }
  SUBCASE("field count mismatch names the row") {
    const std::string bad =
        write_temp(dir, "short_row.csv", "id,x1,followup_end,terminal_time\na,1,2,\nb,0,3\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad, events),
                         doctest::Contains("row 3: expected 4 fields, got 3"), std::runtime_error);
  }
  SUBCASE("duplicate subject id") {
    const std::string bad = write_temp(dir, "dup_subject.csv",
                                       "id,x1,followup_end,terminal_time\na,1,2,\na,0,3,\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad, events),
                         doctest::Contains("row 3: duplicate subject id \"a\""),
                         std::runtime_error);
  }
  SUBCASE("non-numeric covariate names the column") {
    const std::string bad =
        write_temp(dir, "bad_value.csv", "id,x1,followup_end,terminal_time\na,oops,2,\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad, events),
                         doctest::Contains("row 2: non-numeric x1 \"oops\""), std::runtime_error);
  }
  SUBCASE("unknown subject id in events") {
    const std::string bad = write_temp(dir, "unknown_id.csv", "id,event_type,time\nzz,1,0.5\n");
    CHECK_THROWS_WITH_AS(load_dataset(subjects, bad),
                         doctest::Contains("row 2: unknown subject id \"zz\""),
                         std::runtime_error);
  }
  SUBCASE("bad events header") {
    const std::string bad = write_temp(dir, "bad_ev_header.csv", "id,type,time\na,1,0.5\n");
    CHECK_THROWS_WITH_AS(load_dataset(subjects, bad),
                         doctest::Contains("row 1: header must be id,event_type,time"),
                         std::runtime_error);
  }
  SUBCASE("event type must be a positive integer") {
    for (const char* type : {"0", "1.5", "-2"}) {
      const std::string bad = write_temp(dir, "bad_type.csv",
                                         std::string("id,event_type,time\na,") + type + ",0.5\n");
      CHECK_THROWS_WITH_AS(load_dataset(subjects, bad),
                           doctest::Contains("row 2: event_type must be a positive integer"),
                           std::runtime_error);
    }
  }
  SUBCASE("event after the risk period is rejected") {
    // Subject a is censored at 2; subject b dies at 2.5 before follow-up 3.
    const std::string past_censoring =
        write_temp(dir, "late1.csv", "id,event_type,time\na,1,2.25\n");
    CHECK_THROWS_WITH_AS(load_dataset(subjects, past_censoring),
                         doctest::Contains("row 2: event for subject \"a\" after follow-up end"),
                         std::runtime_error);
    const std::string past_terminal =
        write_temp(dir, "late2.csv", "id,event_type,time\nb,1,2.75\n");
    CHECK_THROWS_WITH_AS(load_dataset(subjects, past_terminal),
                         doctest::Contains("row 2: event for subject \"b\" after follow-up end"),
                         std::runtime_error);
  }
  SUBCASE("an event at the risk boundary is kept") {
    const std::string boundary = write_temp(dir, "boundary.csv", "id,event_type,time\nb,1,2.5\n");
    const Dataset data = load_dataset(subjects, boundary);
    CHECK(data.subjects[1].recurrent_times[0] == std::vector<double>{2.5});
  }
  SUBCASE("duplicate event names subject, type, and time") {
    const std::string bad =
        write_temp(dir, "dup_event.csv", "id,event_type,time\na,1,1.5\na,1,1.5\n");
    CHECK_THROWS_WITH_AS(
        load_dataset(subjects, bad),
        doctest::Contains("row 3: duplicate event for subject \"a\" type 1 at time 1.5"),
        std::runtime_error);
  }
  SUBCASE("same time at different types is allowed") {
    const std::string tied =
        write_temp(dir, "tied.csv", "id,event_type,time\na,1,1.5\na,2,1.5\n");
    const Dataset data = load_dataset(subjects, tied);
    CHECK(data.n_types == 2);
    CHECK(data.subjects[0].recurrent_times[0] == std::vector<double>{1.5});
    CHECK(data.subjects[0].recurrent_times[1] == std::vector<double>{1.5});
  }
  SUBCASE("type beyond the configured count") {
    const std::string bad = write_temp(dir, "wide_type.csv", "id,event_type,time\na,3,0.5\n");
    CHECK_THROWS_WITH_AS(load_dataset(subjects, bad, 2),
                         doctest::Contains("event_type 3 exceeds configured type count 2"),
                         std::runtime_error);
  }
  SUBCASE("header-only events file gives an event-free dataset") {
    const std::string empty = write_temp(dir, "no_events.csv", "id,event_type,time\n");
    const Dataset data = load_dataset(subjects, empty, 2);
    CHECK(data.size() == 2);
    CHECK(data.n_types == 2);
    for (const auto& s : data.subjects)
      for (const auto& times : s.recurrent_times) CHECK(times.empty());
  }
  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(load_dataset(dir + "/absent.csv", events),
                         doctest::Contains("cannot open"), std::runtime_error);
  }
}

TEST_CASE("save produces canonical bytes and load-save round-trips exactly") {
  const std::string dir = temp_dir("roundtrip");
  std::vector<std::string> names;
  const Dataset data =
      load_dataset(kFixtures + "/subjects.csv", kFixtures + "/events.csv", 0, &names);

  const std::string subjects1 = dir + "/subjects1.csv";
  const std::string events1 = dir + "/events1.csv";
  save_dataset(data, subjects1, events1, names);

  // The fixture files are already in canonical form, so a load-save cycle
  // reproduces them byte for byte.
  CHECK(read_text_file(subjects1) == read_text_file(kFixtures + "/subjects.csv"));
  CHECK(read_text_file(events1) == read_text_file(kFixtures + "/events.csv"));

  std::vector<std::string> names2;
  const Dataset again = load_dataset(subjects1, events1, 0, &names2);
  CHECK(names2 == names);
  const std::string subjects2 = dir + "/subjects2.csv";
  const std::string events2 = dir + "/events2.csv";
  save_dataset(again, subjects2, events2, names2);
  CHECK(read_text_file(subjects2) == read_text_file(subjects1));
  CHECK(read_text_file(events2) == read_text_file(events1));

  SUBCASE("a comment becomes the first line and is skipped on load") {
    const std::string subjects3 = dir + "/subjects3.csv";
    const std::string events3 = dir + "/events3.csv";
    save_dataset(data, subjects3, events3, names, "# provenance line");
    CHECK(first_line(subjects3) == "# provenance line");
    CHECK(first_line(events3) == "# provenance line");
    const Dataset reread = load_dataset(subjects3, events3);
    CHECK(reread.size() == data.size());
    CHECK(reread.subjects[0].recurrent_times == data.subjects[0].recurrent_times);
  }
  SUBCASE("covariate name count must match") {
    CHECK_THROWS_WITH_AS(save_dataset(data, dir + "/x.csv", dir + "/y.csv", {"only_one"}),
                         doctest::Contains("covariate name count mismatch"), std::invalid_argument);
  }
  SUBCASE("default names are x1..xp") {
    CHECK(default_covariate_names(3) == std::vector<std::string>{"x1", "x2", "x3"});
    const std::string subjects4 = dir + "/subjects4.csv";
    save_dataset(data, subjects4, dir + "/events4.csv");
    CHECK(first_line(subjects4) == "id,x1,x2,followup_end,terminal_time");
  }
}

TEST_CASE("csv primitives: formatting, parsing, quoting") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-0.25) == "-0.25");
  CHECK(format_double(1.0 / 3.0) == "0.333333333333");

  CHECK(parse_double("2.5", 1, "x") == 2.5);
  CHECK(parse_double("-1e-3", 1, "x") == -0.001);
  CHECK_THROWS_WITH_AS(parse_double("abc", 7, "time"),
                       doctest::Contains("row 7: non-numeric time \"abc\""), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_double("1.5x", 2, "x"), doctest::Contains("non-numeric"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_double("", 3, "x"), doctest::Contains("non-numeric"),
                       std::runtime_error);

  SUBCASE("fields with commas and quotes survive a write-read cycle") {
    const std::string dir = temp_dir("csv_quoting");
    const std::vector<std::string> fields{"plain", "with,comma", "with\"quote", ""};
    write_text_file(dir + "/q.csv", csv_join(fields) + "\n");
    const auto rows = read_csv(dir + "/q.csv");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].fields == fields);
  }
  SUBCASE("comments and blank lines are skipped but line numbers are physical") {
    const std::string dir = temp_dir("csv_lines");
    write_text_file(dir + "/c.csv", "# one\n\n# two\na,b\n");
    const auto rows = read_csv(dir + "/c.csv");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].line == 4);
    CHECK(rows[0].fields == std::vector<std::string>{"a", "b"});
  }
  SUBCASE("twelve significant digits round-trip typical magnitudes") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
      const double v = rng.normal(0.0, 1.0) * std::exp(rng.uniform(-6.0, 6.0));
      const double back = parse_double(format_double(v), 1, "v");
      CHECK(back == Approx(v).epsilon(1e-11));
    }
  }
}

TEST_CASE("run configuration parsing accepts the full document and rejects drift") {
  Json j = base_config("fit", "out_dir", 7);
  j["workers"] = 3;
  j["scenario"] = scenario_json(50);
  j["mcmc"] = tiny_mcmc();
  j["priors"] = Json{{"nu", Json{{"shape", 2.0}, {"rate", 2.0}}}};
  j["replication"] = Json{{"replicates", 4}, {"survival_times", Json::array({0.5, 1.0})}};

  const RunConfig config = parse_run_config(j.dump());
  CHECK(config.schema_version == 1);
  CHECK(config.command == "fit");
  CHECK(config.seed == 7);
  CHECK(config.workers == 3);
  CHECK(config.out == "out_dir");
  REQUIRE(config.has_scenario);
  CHECK(config.scenario.n == 50);
  CHECK(config.scenario.nu_true == 2.0);
  CHECK(config.scenario.recurrent_scales == std::vector<double>{1.2, 1.3, 1.4});
  CHECK(config.scenario.alpha_true[0][0] == 0.35);
  CHECK(config.scenario.alpha_true[0][1] == 0.0);
  CHECK(config.scenario.beta_true[0] == std::vector<double>{-0.10, 0.10});
  CHECK(config.scenario.beta_true[2] == std::vector<double>{-0.30, 0.25});
  CHECK(config.scenario.censor_low == 1.0);
  CHECK(config.scenario.covariates.size() == 2);
  REQUIRE(config.has_mcmc);
  CHECK(config.mcmc.iterations == 60);
  CHECK(config.mcmc.burn_in == 20);
  CHECK(config.mcmc.thin == 4);
  CHECK(config.mcmc.n_chains == 2);
  CHECK(config.mcmc.stored_per_chain() == 10);
  REQUIRE(config.has_priors);
  REQUIRE(config.has_replication);
  CHECK(config.replicates == 4);
  CHECK(config.survival_times == std::vector<double>{0.5, 1.0});
  CHECK_FALSE(config.sensitivity);

  SUBCASE("defaults fill in when sections are absent") {
    const RunConfig d = parse_run_config(R"({"schema_version": 1})");
    CHECK(d.command.empty());
    CHECK(d.seed == 1);
    CHECK(d.workers == 1);
    CHECK(d.out == "out");
    CHECK_FALSE(d.has_scenario);
    CHECK_FALSE(d.has_mcmc);
  }
  SUBCASE("schema_version is required and pinned") {
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"command": "fit"})"),
                         doctest::Contains("config: top level: missing \"schema_version\""),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"schema_version": 2})"),
                         doctest::Contains("unsupported schema_version"), std::invalid_argument);
  }
  SUBCASE("invalid JSON is reported as such") {
    CHECK_THROWS_WITH_AS(parse_run_config("{nope"), doctest::Contains("config: invalid JSON"),
                         std::invalid_argument);
  }
  SUBCASE("unknown keys are rejected at every level") {
    Json bad = base_config("fit", "o", 1);
    bad["bogus"] = 1;
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()),
                         doctest::Contains("config: top level: unknown key \"bogus\""),
                         std::invalid_argument);

    Json bad_mcmc = base_config("fit", "o", 1);
    bad_mcmc["mcmc"] = Json{{"iterations_total", 100}};
    CHECK_THROWS_WITH_AS(parse_run_config(bad_mcmc.dump()),
                         doctest::Contains("config: mcmc: unknown key \"iterations_total\""),
                         std::invalid_argument);

    Json bad_scn = base_config("simulate", "o", 1);
    bad_scn["scenario"] = scenario_json(10);
    bad_scn["scenario"]["extra"] = true;
    CHECK_THROWS_WITH_AS(parse_run_config(bad_scn.dump()),
                         doctest::Contains("config: scenario: unknown key \"extra\""),
                         std::invalid_argument);

    Json bad_cens = base_config("simulate", "o", 1);
    bad_cens["scenario"] = scenario_json(10);
    bad_cens["scenario"]["censoring"]["mid"] = 2.0;
    CHECK_THROWS_WITH_AS(parse_run_config(bad_cens.dump()),
                         doctest::Contains("config: scenario.censoring: unknown key \"mid\""),
                         std::invalid_argument);
  }
  SUBCASE("seed must be a nonnegative integer") {
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"schema_version": 1, "seed": -5})"),
                         doctest::Contains("\"seed\" must be a nonnegative integer"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"schema_version": 1, "seed": 1.5})"),
                         doctest::Contains("\"seed\" must be a nonnegative integer"),
                         std::invalid_argument);
  }
  SUBCASE("mcmc sanity rules") {
    Json bad = base_config("fit", "o", 1);
    bad["mcmc"] = Json{{"iterations", 10}, {"burn_in", 10}};
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()),
                         doctest::Contains("\"burn_in\" must be below \"iterations\""),
                         std::invalid_argument);
    bad["mcmc"] = Json{{"thin", 0}};
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()),
                         doctest::Contains("\"thin\" must be >= 1"), std::invalid_argument);
    bad["mcmc"] = Json{{"hazard_update", "bogus"}};
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()),
                         doctest::Contains("\"hazard_update\" must be \"sample\" or \"mean\""),
                         std::invalid_argument);
  }
  SUBCASE("dataset section needs both paths") {
    Json bad = base_config("fit", "o", 1);
    bad["dataset"] = Json{{"subjects", "s.csv"}};
    CHECK_THROWS_WITH_AS(parse_run_config(bad.dump()),
                         doctest::Contains("needs \"subjects\" and \"events\" paths"),
                         std::invalid_argument);
  }
  SUBCASE("scenario alpha accepts an explicit matrix") {
    Json alt = base_config("simulate", "o", 1);
    alt["scenario"] = scenario_json(10);
    alt["scenario"]["alpha"] = Json::array();
    for (int q = 0; q < 3; ++q) {
      Json row = Json::array();
      for (int l = 0; l < 3; ++l) row.push_back(q == l ? 0.3 : 0.05);
      alt["scenario"]["alpha"].push_back(row);
    }
    const RunConfig c = parse_run_config(alt.dump());
    CHECK(c.scenario.alpha_true[1][0] == 0.05);
    CHECK(c.scenario.alpha_true[1][1] == 0.3);
  }
}

TEST_CASE("prior specification builder expands shared scalars and validates") {
  SUBCASE("defaults") {
    const PriorSpec spec = default_prior_spec(2, 3, 4.0);
    REQUIRE(spec.process.size() == 3);
    for (const auto& proc : spec.process) {
      CHECK(proc.precision == 0.1);
      CHECK(proc.mean_chf(4.0) == Approx(1.0));  // exponential working mean at the horizon
    }
    CHECK(spec.parametric.beta[0].mean == std::vector<double>(3, 0.0));
    CHECK(spec.parametric.beta[0].variance == std::vector<double>(3, 1.0));
    CHECK(spec.parametric.alpha[0][0].shape == 0.5);
    CHECK(spec.parametric.alpha[0][0].rate == 2.0);
    CHECK(spec.parametric.gamma[1].shape == 0.5);
    CHECK(spec.parametric.nu.shape == 1.0);
    CHECK(spec.parametric.nu.rate == 1.0);
    CHECK(spec.alpha_free == same_type_structure(2));
    CHECK(spec.n_types() == 2);
  }
  SUBCASE("explicit sections override the defaults") {
    Json priors;
    priors["process"] =
        Json{{"terminal", Json{{"precision", 0.01},
                               {"mean", Json{{"family", "weibull"}, {"shape", 1.1}, {"scale", 2.2}}}}},
             {"recurrent", Json::array({Json{{"precision", 0.2}},
                                        Json{{"mean", Json{{"family", "exponential"}, {"mean", 5.0}}}}})}};
    priors["beta"] = Json{{"variance", 4.0}};
    priors["alpha"] = Json{{"structure", "full"}, {"shape", 0.7}, {"rate", 1.4}};
    priors["gamma"] = Json{{"shape", 0.6}, {"rate", 3.0}};
    priors["nu"] = Json{{"shape", 2.0}, {"rate", 2.0}};
    const PriorSpec spec = make_prior_spec(priors, 2, 2, 3.0);
    CHECK(spec.process[0].precision == 0.01);
    CHECK(spec.process[0].mean_chf(2.2) == Approx(1.0));  // Weibull hits 1 at its scale
    CHECK(spec.process[1].precision == 0.2);
    CHECK(spec.process[2].precision == 0.1);
    CHECK(spec.process[2].mean_chf(5.0) == Approx(1.0));
    CHECK(spec.parametric.beta[1].variance == std::vector<double>(2, 4.0));
    CHECK(spec.parametric.alpha[0][1].shape == 0.7);
    CHECK(spec.parametric.alpha[0][1].rate == 1.4);
    CHECK(spec.parametric.gamma[0].rate == 3.0);
    CHECK(spec.parametric.nu.shape == 2.0);
    CHECK(spec.alpha_free == full_structure(2));
  }
  SUBCASE("rejections") {
    CHECK_THROWS_WITH_AS(make_prior_spec(Json{{"alpha", Json{{"structure", "diag"}}}}, 2, 2, 3.0),
                         doctest::Contains("must be \"same_type\" or \"full\""),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_prior_spec(Json{{"extra", 1}}, 2, 2, 3.0),
                         doctest::Contains("priors: unknown key \"extra\""), std::invalid_argument);
    Json bad_proc;
    bad_proc["process"] = Json{{"recurrent", Json::array({Json{{"precision", 0.1}}})}};
    CHECK_THROWS_WITH_AS(make_prior_spec(bad_proc, 2, 2, 3.0),
                         doctest::Contains("needs one entry per recurrent type"),
                         std::invalid_argument);
  }
}

TEST_CASE("config hash and provenance are stable, sensitive, and well formed") {
  Json j = base_config("simulate", "o", 12);
  j["scenario"] = scenario_json(10);
  const RunConfig a = parse_run_config(j.dump());
  const RunConfig b = parse_run_config(j.dump());
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a).find_first_not_of("0123456789abcdef") == std::string::npos);

  j["seed"] = 13;
  const RunConfig c = parse_run_config(j.dump());
  CHECK(config_hash(c) != config_hash(a));

  const std::string comment = provenance_comment(a);
  CHECK(comment.rfind("# jdfm ", 0) == 0);
  CHECK(comment.find("config=" + config_hash(a)) != std::string::npos);
  CHECK(comment.find("seed=12") != std::string::npos);

  const Json prov = provenance_json(a);
  CHECK(prov["config_hash"] == config_hash(a));
  CHECK(prov["seed"] == 12);
  CHECK(prov.contains("version"));

  // Spot-check the hash primitive against the published FNV-1a test vector.
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("a") == 12638187200555641996ULL);
}

TEST_CASE("simulate command writes a loadable dataset with provenance") {
  const std::string out = temp_dir("cmd_simulate");
  Json j = base_config("simulate", out, 21);
  j["scenario"] = scenario_json(40);
  const RunConfig config = parse_run_config(j.dump());

  const Json result = run_command(config);
  CHECK(result["n"] == 40);
  CHECK(result["n_types"] == 3);
  CHECK(result["n_covariates"] == 2);
  CHECK(result["subjects"] == out + "/subjects.csv");
  CHECK(result["events"] == out + "/events.csv");

  const Dataset data = load_dataset(out + "/subjects.csv", out + "/events.csv");
  CHECK(data.size() == 40);
  CHECK(data.n_types == 3);
  CHECK(data.n_covariates == 2);

  std::size_t recurrent = 0, terminal = 0;
  for (const auto& s : data.subjects) {
    for (const auto& times : s.recurrent_times) recurrent += times.size();
    if (s.terminal_observed()) ++terminal;
  }
  CHECK(result["recurrent_events"] == recurrent);
  CHECK(result["terminal_events"] == terminal);

  CHECK(first_line(out + "/subjects.csv") == provenance_comment(config));
  CHECK(first_line(out + "/events.csv") == provenance_comment(config));

  const Json meta = Json::parse(read_text_file(out + "/meta.json"));
  CHECK(meta["provenance"]["config_hash"] == config_hash(config));
  CHECK(meta["provenance"]["seed"] == 21);
  CHECK(meta["n"] == 40);

  SUBCASE("the same seed reproduces the same bytes") {
    const std::string out2 = temp_dir("cmd_simulate_again");
    Json j2 = base_config("simulate", out2, 21);
    j2["scenario"] = scenario_json(40);
    run_command(parse_run_config(j2.dump()));
    // Bodies match; only the provenance comment (which hashes the out path) differs.
    const auto body = [](const std::string& path) {
      const std::string text = read_text_file(path);
      return text.substr(text.find('\n') + 1);
    };
    CHECK(body(out2 + "/subjects.csv") == body(out + "/subjects.csv"));
    CHECK(body(out2 + "/events.csv") == body(out + "/events.csv"));
  }
  SUBCASE("simulate without a scenario fails") {
    CHECK_THROWS_WITH_AS(run_command(parse_run_config(base_config("simulate", out, 1).dump())),
                         doctest::Contains("simulate needs a \"scenario\" section"),
                         std::invalid_argument);
  }
}

TEST_CASE("fit command produces summary, diagnostics, survival, and an archive") {
  const std::string out = temp_dir("cmd_fit");
  Json j = base_config("fit", out, 33);
  j["scenario"] = scenario_json(25);
  j["mcmc"] = tiny_mcmc();
  const RunConfig config = parse_run_config(j.dump());

  const Json result = run_command(config);
  CHECK(result["chains"] == 2);
  CHECK(result["stored_per_chain"] == 10);
  CHECK(result["archive"] == out + "/draws");
  CHECK(result["summary"] == out + "/summary.csv");
  CHECK(result["diagnostics"] == out + "/diagnostics.csv");
  CHECK(result["survival"] == out + "/survival.json");

  // Summary: provenance first line, fixed header, one row per parameter, and
  // hazard ratios exactly for the regression-coefficient rows.
  CHECK(first_line(out + "/summary.csv") == provenance_comment(config));
  const auto summary_rows = read_csv(out + "/summary.csv");
  REQUIRE(summary_rows.size() >= 2);
  CHECK(summary_rows[0].fields ==
        std::vector<std::string>{"parameter", "estimate", "standard_error", "ci_lower", "ci_upper",
                                 "hazard_ratio"});
  const ParamLayout layout = make_layout(3, 2, same_type_structure(3));
  REQUIRE(summary_rows.size() == 1 + layout.size());
  for (std::size_t r = 1; r < summary_rows.size(); ++r) {
    const auto& row = summary_rows[r];
    CHECK(row.fields[0] == layout.names[r - 1]);
    const double estimate = parse_double(row.fields[1], row.line, "estimate");
    const double lo = parse_double(row.fields[3], row.line, "lo");
    const double hi = parse_double(row.fields[4], row.line, "hi");
    CHECK(lo <= estimate);
    CHECK(estimate <= hi);
    const bool is_beta = row.fields[0].rfind("beta_", 0) == 0;
    CHECK(row.fields[5].empty() == !is_beta);
    if (is_beta)
      CHECK(parse_double(row.fields[5], row.line, "hr") == Approx(std::exp(estimate)).epsilon(1e-9));
  }

  CHECK(first_line(out + "/diagnostics.csv") == provenance_comment(config));
  const auto diag_rows = read_csv(out + "/diagnostics.csv");
  REQUIRE(diag_rows.size() == 1 + layout.size());
  CHECK(diag_rows[0].fields ==
        std::vector<std::string>{"parameter", "rhat", "ess", "ess_fraction", "ess_raw"});

  const Json survival = Json::parse(read_text_file(out + "/survival.json"));
  CHECK(survival["provenance"]["config_hash"] == config_hash(config));
  REQUIRE(survival["curves"].is_array());
  REQUIRE(survival["curves"].size() == 1);  // default: terminal process, zero profile
  const Json& curve = survival["curves"][0];
  CHECK(curve["process"] == 0);
  CHECK(curve["covariates"] == Json::array({0.0, 0.0}));
  REQUIRE(curve["time"].size() == curve["mean"].size());
  const auto means = curve["mean"].get<std::vector<double>>();
  REQUIRE(!means.empty());
  for (std::size_t t = 0; t < means.size(); ++t) {
    CHECK(means[t] <= 1.0 + 1e-12);
    CHECK(means[t] >= 0.0);
    if (t > 0) CHECK(means[t] <= means[t - 1] + 1e-12);
    CHECK(curve["lo"][t].get<double>() <= means[t] + 1e-12);
    CHECK(curve["hi"][t].get<double>() >= means[t] - 1e-12);
  }

  // The archive on disk reproduces the draws the reports were rendered from.
  const PosteriorDraws draws = read_draws_archive(out + "/draws");
  CHECK(draws.chains.size() == 2);
  CHECK(draws.n_types == 3);
  CHECK(draws.n_subjects == 25);
  CHECK(draws.layout.names == layout.names);
  CHECK(draws.chains[0].scalars.size() == 10);

  SUBCASE("rerunning the identical config overwrites with identical bytes") {
    const std::string summary_before = read_text_file(out + "/summary.csv");
    const std::string diag_before = read_text_file(out + "/diagnostics.csv");
    const std::string survival_before = read_text_file(out + "/survival.json");
    const std::string scalars_before = read_text_file(out + "/draws/draws_scalars_chain1.csv");
    run_command(config);
    CHECK(read_text_file(out + "/summary.csv") == summary_before);
    CHECK(read_text_file(out + "/diagnostics.csv") == diag_before);
    CHECK(read_text_file(out + "/survival.json") == survival_before);
    CHECK(read_text_file(out + "/draws/draws_scalars_chain1.csv") == scalars_before);
  }
  SUBCASE("fit needs data from somewhere") {
    Json bare = base_config("fit", out, 1);
    CHECK_THROWS_WITH_AS(run_command(parse_run_config(bare.dump())),
                         doctest::Contains("fit needs a \"dataset\" or \"scenario\" section"),
                         std::invalid_argument);
  }
}

TEST_CASE("fit command reads an on-disk dataset and keeps its covariate names") {
  const std::string out = temp_dir("cmd_fit_dataset");
  Json j = base_config("fit", out, 5);
  j["dataset"] = Json{{"subjects", kFixtures + "/subjects.csv"},
                      {"events", kFixtures + "/events.csv"},
                      {"n_types", 2}};
  Json m = tiny_mcmc();
  m["chains"] = 1;
  m["iterations"] = 40;
  m["burn_in"] = 16;
  m["thin"] = 3;
  j["mcmc"] = m;
  const RunConfig config = parse_run_config(j.dump());
  const Json result = run_command(config);
  CHECK(result["chains"] == 1);
  CHECK(result["stored_per_chain"] == 8);

  const auto rows = read_csv(out + "/summary.csv");
  const ParamLayout layout = make_layout(2, 2, same_type_structure(2), {"x1", "x2"});
  REQUIRE(rows.size() == 1 + layout.size());
  bool saw_named = false;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(rows[r].fields[0] == layout.names[r - 1]);
    if (rows[r].fields[0] == "beta_terminal_x1") saw_named = true;
  }
  CHECK(saw_named);
}

TEST_CASE("replicate command writes tables, curves, and a JSON report") {
  const std::string out = temp_dir("cmd_replicate");
  Json j = base_config("replicate", out, 9);
  j["workers"] = 2;
  j["scenario"] = scenario_json(15);
  Json m = tiny_mcmc();
  m["chains"] = 1;
  m["iterations"] = 40;
  m["burn_in"] = 16;
  m["thin"] = 2;
  j["mcmc"] = m;
  j["replication"] = Json{{"replicates", 2}, {"survival_times", Json::array({0.5, 1.0, 2.0})}};
  const RunConfig config = parse_run_config(j.dump());

  const Json result = run_command(config);
  CHECK(result["arms"] == 1);
  CHECK(result["table"] == out + "/replication.csv");

  CHECK(first_line(out + "/replication.csv") == provenance_comment(config));
  const auto table = read_csv(out + "/replication.csv");
  CHECK(table[0].fields ==
        std::vector<std::string>{"arm", "parameter", "n", "truth", "bias", "sd", "rmse", "cp",
                                 "ci_width"});
  const ParamLayout layout = make_layout(3, 2, same_type_structure(3));
  REQUIRE(table.size() == 1 + layout.size());
  for (std::size_t r = 1; r < table.size(); ++r) {
    CHECK(table[r].fields[0] == "standard");
    CHECK(table[r].fields[1] == layout.names[r - 1]);
    CHECK(table[r].fields[2] == "15");
    const double rmse = parse_double(table[r].fields[6], table[r].line, "rmse");
    const double bias = parse_double(table[r].fields[4], table[r].line, "bias");
    const double sd = parse_double(table[r].fields[5], table[r].line, "sd");
    CHECK(rmse == Approx(std::sqrt(bias * bias + sd * sd)).epsilon(1e-9));
    const double cp = parse_double(table[r].fields[7], table[r].line, "cp");
    CHECK(cp >= 0.0);
    CHECK(cp <= 1.0);
  }

  const auto curves = read_csv(out + "/survival_rmse.csv");
  CHECK(curves[0].fields == std::vector<std::string>{"arm", "process", "time", "truth", "rmse"});
  REQUIRE(curves.size() == 1 + 4 * 3);  // four processes at three times
  for (std::size_t r = 1; r < curves.size(); ++r) {
    const double truth = parse_double(curves[r].fields[3], curves[r].line, "truth");
    CHECK(truth > 0.0);
    CHECK(truth <= 1.0);
    CHECK(parse_double(curves[r].fields[4], curves[r].line, "rmse") >= 0.0);
  }

  const Json report = Json::parse(read_text_file(out + "/replication.json"));
  CHECK(report["provenance"]["config_hash"] == config_hash(config));
  REQUIRE(report["arms"].size() == 1);
  CHECK(report["arms"][0]["arm"] == "standard");
  CHECK(report["arms"][0]["replicates"] == 2);
  CHECK(report["arms"][0]["completed"] == 2);
  CHECK(report["arms"][0]["failed"] == 0);
  CHECK(report["arms"][0]["rows"].size() == layout.size());
  CHECK(report["arms"][0]["survival_times"] == Json::array({0.5, 1.0, 2.0}));

  SUBCASE("replicate without a scenario fails") {
    CHECK_THROWS_WITH_AS(run_command(parse_run_config(base_config("replicate", out, 1).dump())),
                         doctest::Contains("replicate needs a \"scenario\" section"),
                         std::invalid_argument);
  }
}

TEST_CASE("diagnose and report commands reuse an existing archive") {
  const std::string fit_out = temp_dir("cmd_archive_fit");
  Json j = base_config("fit", fit_out, 44);
  j["scenario"] = scenario_json(20);
  j["mcmc"] = tiny_mcmc();
  const RunConfig fit_config = parse_run_config(j.dump());
  run_command(fit_config);

  SUBCASE("diagnose") {
    const std::string out = temp_dir("cmd_diagnose");
    Json d = base_config("diagnose", out, 1);
    d["archive"] = fit_out + "/draws";
    const RunConfig config = parse_run_config(d.dump());
    const Json result = run_command(config);
    CHECK(result["chains"] == 2);
    CHECK(result["parameters"] == make_layout(3, 2, same_type_structure(3)).size());
    CHECK(first_line(out + "/diagnostics.csv") == provenance_comment(config));
    // Same diagnostics the fit run produced, modulo the provenance line.
    const auto fresh = read_csv(out + "/diagnostics.csv");
    const auto original = read_csv(fit_out + "/diagnostics.csv");
    REQUIRE(fresh.size() == original.size());
    for (std::size_t r = 1; r < fresh.size(); ++r) {
      CHECK(fresh[r].fields[0] == original[r].fields[0]);
      for (std::size_t c = 1; c < 5; ++c) {
        const std::string& a = fresh[r].fields[c];
        const std::string& b = original[r].fields[c];
        if (a == "nan" || b == "nan") {
          CHECK(a == b);
        } else {
          CHECK(parse_double(a, 1, "v") ==
                Approx(parse_double(b, 1, "v")).epsilon(1e-9).scale(1.0));
        }
      }
    }
  }
  SUBCASE("report regenerates numerically matching summaries from the archive") {
    const std::string out = temp_dir("cmd_report");
    Json rep = base_config("report", out, 1);
    rep["archive"] = fit_out + "/draws";
    rep["report"] = Json{{"profiles", Json::array({Json::array({1.0, 0.0})})},
                         {"processes", Json::array({0, 1})},
                         {"conditional", false}};
    const RunConfig config = parse_run_config(rep.dump());
    const Json result = run_command(config);
    CHECK(result["archive"] == fit_out + "/draws");

    const auto fresh = read_csv(out + "/summary.csv");
    const auto original = read_csv(fit_out + "/summary.csv");
    REQUIRE(fresh.size() == original.size());
    // Archived values carry twelve significant digits, so the re-derived
    // table agrees to ~1e-11 relative rather than byte-for-byte.
    for (std::size_t r = 1; r < fresh.size(); ++r) {
      CHECK(fresh[r].fields[0] == original[r].fields[0]);
      for (std::size_t c = 1; c < 6; ++c) {
        const std::string& a = fresh[r].fields[c];
        const std::string& b = original[r].fields[c];
        REQUIRE(a.empty() == b.empty());
        if (!a.empty())
          CHECK(parse_double(a, 1, "v") ==
                Approx(parse_double(b, 1, "v")).epsilon(1e-9).scale(1.0));
      }
    }

    const Json survival = Json::parse(read_text_file(out + "/survival.json"));
    REQUIRE(survival["curves"].size() == 2);  // one profile x two processes
    CHECK(survival["curves"][0]["process"] == 0);
    CHECK(survival["curves"][1]["process"] == 1);
    CHECK(survival["curves"][0]["covariates"] == Json::array({1.0, 0.0}));
  }
  SUBCASE("archive path is required") {
    CHECK_THROWS_WITH_AS(run_command(parse_run_config(base_config("diagnose", "o", 1).dump())),
                         doctest::Contains("diagnose needs an \"archive\" path"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(run_command(parse_run_config(base_config("report", "o", 1).dump())),
                         doctest::Contains("report needs an \"archive\" path"),
                         std::invalid_argument);
  }
  SUBCASE("unknown command") {
    Json bad = base_config("transmogrify", "o", 1);
    CHECK_THROWS_WITH_AS(run_command(parse_run_config(bad.dump())),
                         doctest::Contains("unknown command \"transmogrify\""),
                         std::invalid_argument);
  }
}

TEST_CASE("draws archive round-trips every stored block") {
  const std::string dir = temp_dir("archive_roundtrip") + "/draws";
  const PosteriorDraws draws = synthetic_draws(3, 40, 77);
  const Json provenance{{"version", "test"}, {"config_hash", "deadbeefdeadbeef"}, {"seed", 77}};
  write_draws_archive(dir, draws, {"s1", "s2", "s3"}, provenance, "# test comment");

  const Json manifest = Json::parse(read_text_file(dir + "/manifest.json"));
  CHECK(manifest["kind"] == "draws_archive");
  CHECK(manifest["schema_version"] == 1);
  CHECK(manifest["provenance"]["config_hash"] == "deadbeefdeadbeef");
  CHECK(manifest["n_chains"] == 3);
  CHECK(manifest["stored_per_chain"] == 40);
  CHECK(manifest["subject_ids"] == Json::array({"s1", "s2", "s3"}));
  for (const std::string stem :
       {"draws_scalars_chain1.csv", "draws_chf_chain2.csv", "draws_increments_chain3.csv",
        "frailty_summary.csv"})
    CHECK(first_line(dir + "/" + stem) == "# test comment");

  const PosteriorDraws back = read_draws_archive(dir);
  CHECK(back.layout.names == draws.layout.names);
  CHECK(back.layout.nu_col == draws.layout.nu_col);
  CHECK(back.layout.beta_span == draws.layout.beta_span);
  CHECK(back.layout.alpha_cols == draws.layout.alpha_cols);
  CHECK(back.layout.gamma_cols == draws.layout.gamma_cols);
  CHECK(back.report_times == draws.report_times);
  CHECK(back.grid.times == draws.grid.times);
  CHECK(back.n_types == 2);
  CHECK(back.n_subjects == 3);
  CHECK(back.config.iterations == draws.config.iterations);
  CHECK(back.config.burn_in == draws.config.burn_in);
  CHECK(back.config.thin == draws.config.thin);
  CHECK(back.config.seed == draws.config.seed);
  REQUIRE(back.chains.size() == 3);

  for (std::size_t k = 0; k < 3; ++k) {
    const ChainDraws& orig = draws.chains[k];
    const ChainDraws& got = back.chains[k];
    CHECK(got.nu_acceptance == orig.nu_acceptance);
    CHECK(got.block_acceptance == orig.block_acceptance);
    CHECK(got.degenerate_increments == orig.degenerate_increments);
    REQUIRE(got.scalars.size() == orig.scalars.size());
    for (std::size_t s = 0; s < orig.scalars.size(); ++s) {
      for (std::size_t c = 0; c < orig.scalars[s].size(); ++c)
        CHECK(got.scalars[s][c] == Approx(orig.scalars[s][c]).epsilon(1e-11));
      for (std::size_t process = 0; process < 3; ++process) {
        for (std::size_t t = 0; t < 2; ++t)
          CHECK(got.chf_report[s][process][t] ==
                Approx(orig.chf_report[s][process][t]).epsilon(1e-11));
        for (std::size_t g = 0; g < 3; ++g)
          CHECK(got.increments[s][process][g] ==
                Approx(orig.increments[s][process][g]).epsilon(1e-11));
      }
    }
  }

  SUBCASE("frailty summary merges chain moments") {
    const FrailtySummary merged = merge_frailty_moments(draws.chains);
    const auto rows = read_csv(dir + "/frailty_summary.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].fields == std::vector<std::string>{"id", "mean", "sd"});
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(rows[i + 1].fields[0] == "s" + std::to_string(i + 1));
      CHECK(parse_double(rows[i + 1].fields[1], 1, "mean") == Approx(merged.mean[i]).epsilon(1e-11));
      CHECK(parse_double(rows[i + 1].fields[2], 1, "sd") == Approx(merged.sd[i]).epsilon(1e-11));
    }
    // Merged over equal-sized iid chains, the mean of means matches pooling.
    std::vector<double> pooled;
    for (const auto& chain : draws.chains) pooled.push_back(chain.frailty_mean[0]);
    double mean_of_means = 0.0;
    for (double m : pooled) mean_of_means += m;
    mean_of_means /= static_cast<double>(pooled.size());
    CHECK(merged.mean[0] == Approx(mean_of_means).epsilon(1e-12));
  }
  SUBCASE("reader rejects non-archives") {
    const std::string empty = temp_dir("archive_empty");
    CHECK_THROWS_WITH_AS(read_draws_archive(empty), doctest::Contains("cannot open"),
                         std::runtime_error);
    const std::string wrong = temp_dir("archive_wrong");
    write_text_file(wrong + "/manifest.json", "{\"kind\": \"other\"}\n");
    CHECK_THROWS_WITH_AS(read_draws_archive(wrong), doctest::Contains("not a draws archive"),
                         std::runtime_error);
    const std::string mangled = temp_dir("archive_mangled");
    write_text_file(mangled + "/manifest.json", "{nope\n");
    CHECK_THROWS_WITH_AS(read_draws_archive(mangled), doctest::Contains("invalid JSON"),
                         std::runtime_error);
  }
}

TEST_CASE("diagnose on an archive of independent draws reports convergence") {
  const std::string dir = temp_dir("diagnose_iid");
  const PosteriorDraws draws = synthetic_draws(4, 400, 2026);
  write_draws_archive(dir + "/draws", draws, {"s1", "s2", "s3"},
                      Json{{"version", "test"}, {"config_hash", "0"}, {"seed", 0}}, "");

  Json j = base_config("diagnose", dir + "/out", 1);
  j["archive"] = dir + "/draws";
  const RunConfig config = parse_run_config(j.dump());
  run_command(config);

  const auto rows = read_csv(dir + "/out/diagnostics.csv");
  REQUIRE(rows.size() == 1 + draws.layout.size());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double rhat = parse_double(rows[r].fields[1], rows[r].line, "rhat");
    const double ess = parse_double(rows[r].fields[2], rows[r].line, "ess");
    const double fraction = parse_double(rows[r].fields[3], rows[r].line, "fraction");
    const double raw = parse_double(rows[r].fields[4], rows[r].line, "raw");
    CHECK(std::isfinite(rhat));
    CHECK(rhat <= 1.02);
    CHECK(ess >= 0.5 * 1600);
    CHECK(ess <= 1600.0);
    CHECK(fraction == Approx(ess / 1600.0).epsilon(1e-9));
    CHECK(raw >= ess);
  }
}
