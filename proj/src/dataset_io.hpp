#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "event_data.hpp"

namespace jdfm {

// Loads a dataset from two CSV files.
//   subjects: id, <covariate columns...>, followup_end, terminal_time (empty = censored)
//   events:   id, event_type (1..Q), time
// Q comes from n_types_hint when positive, otherwise the largest event_type
// seen. Errors carry the file path and 1-based row number. When
// covariate_names is non-null it receives the covariate column headers.
Dataset load_dataset(const std::string& subjects_path, const std::string& events_path,
                     std::size_t n_types_hint = 0,
                     std::vector<std::string>* covariate_names = nullptr);

// Writes the two CSV files in canonical form: subjects in dataset order with
// columns id, <covariates>, followup_end, terminal_time; events ordered by
// subject, then type, then time. A nonempty comment becomes the first line of
// each file. Loading the result reproduces the dataset and re-saving it
// reproduces the bytes.
void save_dataset(const Dataset& data, const std::string& subjects_path,
                  const std::string& events_path,
                  const std::vector<std::string>& covariate_names = {},
                  const std::string& comment = "");

std::vector<std::string> default_covariate_names(std::size_t n_covariates);

}  // namespace jdfm
