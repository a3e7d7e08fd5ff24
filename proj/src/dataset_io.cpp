#include "dataset_io.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <unordered_map>

#include "csv.hpp"

namespace jdfm {

namespace {

[[noreturn]] void fail_row(const std::string& path, std::size_t row, const std::string& what) {
  throw std::runtime_error(path + " row " + std::to_string(row) + ": " + what);
}

}  // namespace

std::vector<std::string> default_covariate_names(std::size_t n_covariates) {
  std::vector<std::string> names;
  names.reserve(n_covariates);
  for (std::size_t k = 0; k < n_covariates; ++k) names.push_back("x" + std::to_string(k + 1));
  return names;
}

Dataset load_dataset(const std::string& subjects_path, const std::string& events_path,
                     std::size_t n_types_hint, std::vector<std::string>* covariate_names) {
  const auto subject_rows = read_csv(subjects_path);
  if (subject_rows.empty()) throw std::runtime_error(subjects_path + ": no header row");
  const auto& header = subject_rows.front().fields;
  if (header.size() < 3 || header.front() != "id" || header[header.size() - 2] != "followup_end" ||
      header.back() != "terminal_time")
    fail_row(subjects_path, subject_rows.front().line,
             "header must be id,<covariates...>,followup_end,terminal_time");
  const std::size_t p = header.size() - 3;
  if (covariate_names != nullptr)
    covariate_names->assign(header.begin() + 1, header.end() - 2);

  Dataset data;
  data.n_covariates = p;
  std::unordered_map<std::string, std::size_t> index_of_id;
  for (std::size_t r = 1; r < subject_rows.size(); ++r) {
    const auto& row = subject_rows[r];
    if (row.fields.size() != header.size())
      fail_row(subjects_path, row.line,
               "expected " + std::to_string(header.size()) + " fields, got " +
                   std::to_string(row.fields.size()));
    Subject s;
    s.id = row.fields[0];
    if (s.id.empty()) fail_row(subjects_path, row.line, "empty subject id");
    if (index_of_id.count(s.id) != 0)
      fail_row(subjects_path, row.line, "duplicate subject id \"" + s.id + "\"");
    for (std::size_t k = 0; k < p; ++k)
      s.covariates.push_back(parse_double(row.fields[1 + k], row.line, header[1 + k]));
    s.followup_end = parse_double(row.fields[1 + p], row.line, "followup_end");
    const std::string& terminal = row.fields[2 + p];
    if (!terminal.empty()) s.terminal_time = parse_double(terminal, row.line, "terminal_time");
    index_of_id.emplace(s.id, data.subjects.size());
    data.subjects.push_back(std::move(s));
  }

  struct TimedRow {
    double time;
    std::size_t line;
  };
  const auto event_rows = read_csv(events_path);
  if (event_rows.empty()) throw std::runtime_error(events_path + ": no header row");
  const auto& event_header = event_rows.front().fields;
  if (event_header != std::vector<std::string>{"id", "event_type", "time"})
    fail_row(events_path, event_rows.front().line, "header must be id,event_type,time");

  struct RawEvent {
    std::size_t subject;
    std::size_t type;  // 1-based
    double time;
    std::size_t line;
  };
  std::vector<RawEvent> raw;
  std::size_t max_type = 0;
  for (std::size_t r = 1; r < event_rows.size(); ++r) {
    const auto& row = event_rows[r];
    if (row.fields.size() != 3) fail_row(events_path, row.line, "expected 3 fields");
    const auto found = index_of_id.find(row.fields[0]);
    if (found == index_of_id.end())
      fail_row(events_path, row.line, "unknown subject id \"" + row.fields[0] + "\"");
    const double type_value = parse_double(row.fields[1], row.line, "event_type");
    const auto type = static_cast<std::size_t>(type_value);
    if (type_value != static_cast<double>(type) || type == 0)
      fail_row(events_path, row.line, "event_type must be a positive integer");
    const double time = parse_double(row.fields[2], row.line, "time");
    const Subject& s = data.subjects[found->second];
    if (time > s.risk_end())
      fail_row(events_path, row.line,
               "event for subject \"" + s.id + "\" after follow-up end");
    max_type = std::max(max_type, type);
    raw.push_back({found->second, type, time, row.line});
  }
  const std::size_t n_types = n_types_hint > 0 ? n_types_hint : max_type;
  if (max_type > n_types)
    throw std::runtime_error(events_path + ": event_type " + std::to_string(max_type) +
                             " exceeds configured type count " + std::to_string(n_types));
  data.n_types = n_types;

  std::vector<std::vector<std::vector<TimedRow>>> buckets(
      data.subjects.size(), std::vector<std::vector<TimedRow>>(n_types));
  for (const auto& e : raw) buckets[e.subject][e.type - 1].push_back({e.time, e.line});
  for (std::size_t i = 0; i < data.subjects.size(); ++i) {
    auto& s = data.subjects[i];
    s.recurrent_times.assign(n_types, {});
    for (std::size_t q = 0; q < n_types; ++q) {
      auto& bucket = buckets[i][q];
      std::sort(bucket.begin(), bucket.end(), [](const TimedRow& a, const TimedRow& b) {
        return a.time < b.time || (a.time == b.time && a.line < b.line);
      });
      for (std::size_t k = 1; k < bucket.size(); ++k)
        if (bucket[k].time == bucket[k - 1].time)
          fail_row(events_path, bucket[k].line,
                   "duplicate event for subject \"" + s.id + "\" type " + std::to_string(q + 1) +
                       " at time " + format_double(bucket[k].time));
      for (const auto& e : bucket) s.recurrent_times[q].push_back(e.time);
    }
  }
  validate(data);
  return data;
}

void save_dataset(const Dataset& data, const std::string& subjects_path,
                  const std::string& events_path, const std::vector<std::string>& covariate_names,
                  const std::string& comment) {
  const std::vector<std::string> names =
      covariate_names.empty() ? default_covariate_names(data.n_covariates) : covariate_names;
  if (names.size() != data.n_covariates)
    throw std::invalid_argument("save_dataset: covariate name count mismatch");

  std::string subjects_text;
  if (!comment.empty()) subjects_text += comment + "\n";
  std::vector<std::string> fields{"id"};
  fields.insert(fields.end(), names.begin(), names.end());
  fields.push_back("followup_end");
  fields.push_back("terminal_time");
  subjects_text += csv_join(fields) + "\n";
  for (const auto& s : data.subjects) {
    fields.clear();
    fields.push_back(s.id);
    for (double x : s.covariates) fields.push_back(format_double(x));
    fields.push_back(format_double(s.followup_end));
    fields.push_back(s.terminal_time ? format_double(*s.terminal_time) : "");
    subjects_text += csv_join(fields) + "\n";
  }
  write_text_file(subjects_path, subjects_text);

  std::string events_text;
  if (!comment.empty()) events_text += comment + "\n";
  events_text += "id,event_type,time\n";
  for (const auto& s : data.subjects)
    for (std::size_t q = 0; q < data.n_types; ++q)
      for (double t : s.recurrent_times[q])
        events_text +=
            csv_join({s.id, std::to_string(q + 1), format_double(t)}) + "\n";
  write_text_file(events_path, events_text);
}

}  // namespace jdfm
