#include "archive.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "csv.hpp"
#include "version.hpp"

namespace jdfm {

namespace {

std::string chain_file(const std::string& stem, std::size_t chain) {
  return stem + "_chain" + std::to_string(chain + 1) + ".csv";
}

std::string style_name(UpdateStyle style) {
  return style == UpdateStyle::sample ? "sample" : "mean";
}

UpdateStyle style_from(const std::string& name) {
  if (name == "sample") return UpdateStyle::sample;
  if (name == "mean") return UpdateStyle::posterior_mean;
  throw std::runtime_error("archive: unknown update style \"" + name + "\"");
}

void append_row(std::string& text, const std::vector<std::string>& fields) {
  text += csv_join(fields) + "\n";
}

std::vector<double> json_doubles(const Json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

}  // namespace

FrailtySummary merge_frailty_moments(const std::vector<ChainDraws>& chains) {
  FrailtySummary out;
  std::size_t count = 0;
  for (const auto& chain : chains) {
    if (chain.frailty_count == 0) continue;
    if (out.mean.empty()) {
      out.mean = chain.frailty_mean;
      out.sd = chain.frailty_m2;  // holds M2 until the final sweep below
      count = chain.frailty_count;
      continue;
    }
    const auto nb = static_cast<double>(chain.frailty_count);
    const auto na = static_cast<double>(count);
    for (std::size_t i = 0; i < out.mean.size(); ++i) {
      const double delta = chain.frailty_mean[i] - out.mean[i];
      out.mean[i] += delta * nb / (na + nb);
      out.sd[i] += chain.frailty_m2[i] + delta * delta * na * nb / (na + nb);
    }
    count += chain.frailty_count;
  }
  for (double& m2 : out.sd) m2 = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) : 0.0;
  return out;
}

void write_draws_archive(const std::string& dir, const PosteriorDraws& draws,
                         const std::vector<std::string>& subject_ids, const Json& provenance,
                         const std::string& comment) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string prefix = comment.empty() ? std::string() : comment + "\n";
  std::vector<std::string> files;

  const std::size_t n_params = draws.layout.size();
  const std::size_t n_processes = draws.n_types + 1;
  const bool have_increments =
      !draws.chains.empty() && !draws.chains.front().increments.empty();
  const bool have_frailty_draws =
      !draws.chains.empty() && !draws.chains.front().frailty_draws.empty();

  for (std::size_t k = 0; k < draws.chains.size(); ++k) {
    const ChainDraws& chain = draws.chains[k];

    std::string scalars = prefix;
    std::vector<std::string> header{"iteration"};
    header.insert(header.end(), draws.layout.names.begin(), draws.layout.names.end());
    append_row(scalars, header);
    for (std::size_t s = 0; s < chain.scalars.size(); ++s) {
      std::vector<std::string> row{std::to_string(s + 1)};
      for (std::size_t c = 0; c < n_params; ++c) row.push_back(format_double(chain.scalars[s][c]));
      append_row(scalars, row);
    }
    files.push_back(chain_file("draws_scalars", k));
    write_text_file(dir + "/" + files.back(), scalars);

    std::string chf = prefix;
    header.assign({"iteration", "process"});
    for (std::size_t t = 0; t < draws.report_times.size(); ++t)
      header.push_back("v" + std::to_string(t + 1));
    append_row(chf, header);
    for (std::size_t s = 0; s < chain.chf_report.size(); ++s)
      for (std::size_t process = 0; process < n_processes; ++process) {
        std::vector<std::string> row{std::to_string(s + 1), std::to_string(process)};
        for (double v : chain.chf_report[s][process]) row.push_back(format_double(v));
        append_row(chf, row);
      }
    files.push_back(chain_file("draws_chf", k));
    write_text_file(dir + "/" + files.back(), chf);

    if (have_increments) {
      std::string inc = prefix;
      header.assign({"iteration", "process"});
      for (std::size_t g = 0; g < draws.grid.times.size(); ++g)
        header.push_back("g" + std::to_string(g + 1));
      append_row(inc, header);
      for (std::size_t s = 0; s < chain.increments.size(); ++s)
        for (std::size_t process = 0; process < n_processes; ++process) {
          std::vector<std::string> row{std::to_string(s + 1), std::to_string(process)};
          for (double v : chain.increments[s][process]) row.push_back(format_double(v));
          append_row(inc, row);
        }
      files.push_back(chain_file("draws_increments", k));
      write_text_file(dir + "/" + files.back(), inc);
    }

    if (have_frailty_draws) {
      std::string fr = prefix;
      header.assign({"iteration"});
      for (const auto& id : subject_ids) header.push_back(id);
      append_row(fr, header);
      for (std::size_t s = 0; s < chain.frailty_draws.size(); ++s) {
        std::vector<std::string> row{std::to_string(s + 1)};
        for (double v : chain.frailty_draws[s]) row.push_back(format_double(v));
        append_row(fr, row);
      }
      files.push_back(chain_file("frailty_draws", k));
      write_text_file(dir + "/" + files.back(), fr);
    }
  }

  const FrailtySummary frailty = merge_frailty_moments(draws.chains);
  if (!frailty.mean.empty()) {
    if (frailty.mean.size() != subject_ids.size())
      throw std::invalid_argument("archive: subject id count mismatch");
    std::string fs_text = prefix + "id,mean,sd\n";
    for (std::size_t i = 0; i < subject_ids.size(); ++i)
      append_row(fs_text,
                 {subject_ids[i], format_double(frailty.mean[i]), format_double(frailty.sd[i])});
    files.push_back("frailty_summary.csv");
    write_text_file(dir + "/frailty_summary.csv", fs_text);
  }

  Json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["kind"] = "draws_archive";
  manifest["provenance"] = provenance;
  manifest["n_chains"] = draws.chains.size();
  manifest["stored_per_chain"] = draws.config.stored_per_chain();
  manifest["n_types"] = draws.n_types;
  manifest["n_subjects"] = draws.n_subjects;
  manifest["parameters"] = draws.layout.names;
  Json blocks;
  blocks["nu"] = draws.layout.nu_col;
  Json spans = Json::array();
  for (const auto& [offset, len] : draws.layout.beta_span) spans.push_back({offset, len});
  blocks["beta_spans"] = spans;
  blocks["alpha_cols"] = draws.layout.alpha_cols;
  blocks["gamma_cols"] = draws.layout.gamma_cols;
  manifest["blocks"] = blocks;
  manifest["report_times"] = draws.report_times;
  if (have_increments) manifest["grid_times"] = draws.grid.times;
  manifest["subject_ids"] = subject_ids;
  manifest["update_modes"] = {{"hazard", style_name(draws.config.hazard_update)},
                              {"frailty", style_name(draws.config.frailty_update)}};
  Json mcmc;
  mcmc["iterations"] = draws.config.iterations;
  mcmc["burn_in"] = draws.config.burn_in;
  mcmc["thin"] = draws.config.thin;
  mcmc["chains"] = draws.config.n_chains;
  mcmc["seed"] = draws.config.seed;
  manifest["mcmc"] = mcmc;
  Json acceptance;
  Json nu_acc = Json::array(), block_acc = Json::array(), degenerate = Json::array();
  for (const auto& chain : draws.chains) {
    nu_acc.push_back(chain.nu_acceptance);
    block_acc.push_back(chain.block_acceptance);
    degenerate.push_back(chain.degenerate_increments);
  }
  acceptance["nu"] = nu_acc;
  acceptance["blocks"] = block_acc;
  manifest["acceptance"] = acceptance;
  manifest["degenerate_increments"] = degenerate;
  manifest["files"] = files;
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

PosteriorDraws read_draws_archive(const std::string& dir) {
  Json manifest;
  try {
    manifest = Json::parse(read_text_file(dir + "/manifest.json"));
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(dir + "/manifest.json: invalid JSON: " + e.what());
  }
  if (!manifest.contains("kind") || manifest["kind"] != "draws_archive")
    throw std::runtime_error(dir + ": not a draws archive");
  if (!manifest.contains("schema_version") ||
      manifest["schema_version"].get<int>() != kSchemaVersion)
    throw std::runtime_error(dir + ": unsupported archive schema version");

  PosteriorDraws draws;
  draws.n_types = manifest["n_types"].get<std::size_t>();
  draws.n_subjects = manifest["n_subjects"].get<std::size_t>();
  draws.report_times = json_doubles(manifest["report_times"]);
  if (manifest.contains("grid_times")) draws.grid.times = json_doubles(manifest["grid_times"]);

  draws.layout.names = manifest["parameters"].get<std::vector<std::string>>();
  const Json& blocks = manifest["blocks"];
  draws.layout.nu_col = blocks["nu"].get<std::size_t>();
  for (const auto& span : blocks["beta_spans"])
    draws.layout.beta_span.emplace_back(span[0].get<std::size_t>(), span[1].get<std::size_t>());
  draws.layout.alpha_cols = blocks["alpha_cols"].get<std::vector<std::vector<std::size_t>>>();
  draws.layout.gamma_cols = blocks["gamma_cols"].get<std::vector<std::size_t>>();

  const Json& mcmc = manifest["mcmc"];
  draws.config.iterations = mcmc["iterations"].get<std::size_t>();
  draws.config.burn_in = mcmc["burn_in"].get<std::size_t>();
  draws.config.thin = mcmc["thin"].get<std::size_t>();
  draws.config.n_chains = mcmc["chains"].get<std::size_t>();
  draws.config.seed = mcmc["seed"].get<uint64_t>();
  draws.config.report_times = draws.report_times;
  draws.config.hazard_update = style_from(manifest["update_modes"]["hazard"].get<std::string>());
  draws.config.frailty_update = style_from(manifest["update_modes"]["frailty"].get<std::string>());
  draws.config.store_increments = manifest.contains("grid_times");

  const auto n_chains = manifest["n_chains"].get<std::size_t>();
  const std::size_t n_processes = draws.n_types + 1;
  const std::size_t n_params = draws.layout.size();
  draws.chains.resize(n_chains);
  for (std::size_t k = 0; k < n_chains; ++k) {
    ChainDraws& chain = draws.chains[k];
    const std::string scalars_path = dir + "/" + chain_file("draws_scalars", k);
    const auto scalar_rows = read_csv(scalars_path);
    if (scalar_rows.empty()) throw std::runtime_error(scalars_path + ": no header row");
    for (std::size_t r = 1; r < scalar_rows.size(); ++r) {
      const auto& row = scalar_rows[r];
      if (row.fields.size() != n_params + 1)
        throw std::runtime_error(scalars_path + " row " + std::to_string(row.line) +
                                 ": column count mismatch");
      std::vector<double> values(n_params);
      for (std::size_t c = 0; c < n_params; ++c)
        values[c] = parse_double(row.fields[c + 1], row.line, draws.layout.names[c]);
      chain.scalars.push_back(std::move(values));
    }

    const std::string chf_path = dir + "/" + chain_file("draws_chf", k);
    const auto chf_rows = read_csv(chf_path);
    if (chf_rows.empty()) throw std::runtime_error(chf_path + ": no header row");
    const std::size_t n_times = draws.report_times.size();
    chain.chf_report.assign(
        chain.scalars.size(),
        std::vector<std::vector<double>>(n_processes, std::vector<double>(n_times)));
    for (std::size_t r = 1; r < chf_rows.size(); ++r) {
      const auto& row = chf_rows[r];
      if (row.fields.size() != n_times + 2)
        throw std::runtime_error(chf_path + " row " + std::to_string(row.line) +
                                 ": column count mismatch");
      const auto s = static_cast<std::size_t>(parse_double(row.fields[0], row.line, "iteration"));
      const auto process =
          static_cast<std::size_t>(parse_double(row.fields[1], row.line, "process"));
      if (s == 0 || s > chain.chf_report.size() || process >= n_processes)
        throw std::runtime_error(chf_path + " row " + std::to_string(row.line) +
                                 ": index out of range");
      for (std::size_t t = 0; t < n_times; ++t)
        chain.chf_report[s - 1][process][t] = parse_double(row.fields[t + 2], row.line, "value");
    }

    if (draws.config.store_increments) {
      const std::string inc_path = dir + "/" + chain_file("draws_increments", k);
      const auto inc_rows = read_csv(inc_path);
      if (inc_rows.empty()) throw std::runtime_error(inc_path + ": no header row");
      const std::size_t m = draws.grid.times.size();
      chain.increments.assign(
          chain.scalars.size(),
          std::vector<std::vector<double>>(n_processes, std::vector<double>(m)));
      for (std::size_t r = 1; r < inc_rows.size(); ++r) {
        const auto& row = inc_rows[r];
        if (row.fields.size() != m + 2)
          throw std::runtime_error(inc_path + " row " + std::to_string(row.line) +
                                   ": column count mismatch");
        const auto s = static_cast<std::size_t>(parse_double(row.fields[0], row.line, "iteration"));
        const auto process =
            static_cast<std::size_t>(parse_double(row.fields[1], row.line, "process"));
        if (s == 0 || s > chain.increments.size() || process >= n_processes)
          throw std::runtime_error(inc_path + " row " + std::to_string(row.line) +
                                   ": index out of range");
        for (std::size_t g = 0; g < m; ++g)
          chain.increments[s - 1][process][g] = parse_double(row.fields[g + 2], row.line, "value");
      }
    }

    chain.nu_acceptance = manifest["acceptance"]["nu"][k].get<double>();
    chain.block_acceptance = manifest["acceptance"]["blocks"][k].get<std::vector<double>>();
    chain.degenerate_increments = manifest["degenerate_increments"][k].get<std::size_t>();
  }
  return draws;
}

}  // namespace jdfm
