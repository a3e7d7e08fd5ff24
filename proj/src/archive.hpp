#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "mcmc_driver.hpp"

namespace jdfm {

// Persists posterior draws as a directory of per-block CSV files plus a JSON
// manifest: plain text, language-portable, inspectable with standard tools.
// subject_ids label the frailty summary rows. provenance is embedded in the
// manifest and echoed as a comment line in every CSV.
void write_draws_archive(const std::string& dir, const PosteriorDraws& draws,
                         const std::vector<std::string>& subject_ids, const Json& provenance,
                         const std::string& comment);

// Rebuilds draws from an archive directory. Everything the diagnostics and
// report paths consume is restored: scalar draws, CHF draws at the report
// times, layout, chain structure, and (when present) increment draws.
PosteriorDraws read_draws_archive(const std::string& dir);

// Per-subject posterior frailty moments merged over chains (id order as given).
struct FrailtySummary {
  std::vector<double> mean;
  std::vector<double> sd;
};
FrailtySummary merge_frailty_moments(const std::vector<ChainDraws>& chains);

}  // namespace jdfm
