// Command-line front end. All statistical work happens behind the C API in
// the shared library; this file only assembles the run configuration
// (flag > environment > config file) and prints results.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "jdfm.h"

namespace {

std::string json_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size() + 2);
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

const char* status_name(jdfm_status status) {
  switch (status) {
    case JDFM_OK: return "ok";
    case JDFM_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case JDFM_ERR_IO: return "io";
    case JDFM_ERR_RUNTIME: return "runtime";
  }
  return "unknown";
}

int emit_error(jdfm_status status, const std::string& message) {
  std::cerr << "{\"error\":{\"code\":" << static_cast<int>(status) << ",\"status\":\""
            << status_name(status) << "\",\"message\":\"" << json_escape(message) << "\"}}\n";
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("jdfm ") + jdfm_version() +
               " — joint modeling of multitype recurrent events and a terminal event "
               "with shared frailty and dynamic past-event effects"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::int32_t workers = 0;
  std::string out_dir;

  const char* descriptions[] = {
      "simulate a dataset from the configured scenario",
      "fit the model by MCMC and write draws, summaries, and survival curves",
      "run a simulate-fit replication study",
      "convergence diagnostics from an existing draws archive",
      "re-render summary tables and survival curves from an existing draws archive"};
  const char* names[] = {"simulate", "fit", "replicate", "diagnose", "report"};
  for (int k = 0; k < 5; ++k) {
    CLI::App* sub = app.add_subcommand(names[k], descriptions[k]);
    sub->add_option("--config", config_path, "run configuration JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master RNG seed (overrides JDFM_SEED and the config file)");
    sub->add_option("--workers", workers,
                    "worker thread count (overrides JDFM_WORKERS and the config file)");
    sub->add_option("--out", out_dir, "output directory (overrides JDFM_OUT and the config file)");
  }

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();

  std::ifstream in(config_path, std::ios::binary);
  if (!in) return emit_error(JDFM_ERR_IO, "cannot open config file: " + config_path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string config_text = buffer.str();

  // Precedence: command-line flag, then environment variable, then file.
  bool have_seed = sub->count("--seed") > 0;
  bool have_workers = sub->count("--workers") > 0;
  bool have_out = sub->count("--out") > 0;
  if (!have_seed) {
    if (const char* env = std::getenv("JDFM_SEED")) {
      char* end = nullptr;
      seed = std::strtoull(env, &end, 10);
      if (end == env || *end != '\0')
        return emit_error(JDFM_ERR_INVALID_ARGUMENT, "JDFM_SEED is not an unsigned integer");
      have_seed = true;
    }
  }
  if (!have_workers) {
    if (const char* env = std::getenv("JDFM_WORKERS")) {
      char* end = nullptr;
      const long value = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || value < 1)
        return emit_error(JDFM_ERR_INVALID_ARGUMENT, "JDFM_WORKERS is not a positive integer");
      workers = static_cast<std::int32_t>(value);
      have_workers = true;
    }
  }
  if (!have_out) {
    if (const char* env = std::getenv("JDFM_OUT")) {
      out_dir = env;
      have_out = true;
    }
  }

  char* result = nullptr;
  const jdfm_status status =
      jdfm_run(config_text.c_str(), sub->get_name().c_str(), have_seed ? &seed : nullptr,
               have_workers ? &workers : nullptr, have_out ? out_dir.c_str() : nullptr, &result);
  if (status != JDFM_OK) return emit_error(status, jdfm_last_error());
  if (result != nullptr) {
    std::cout << result << "\n";
    jdfm_string_free(result);
  }
  return 0;
}
