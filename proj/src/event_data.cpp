#include "event_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace jdfm {

namespace {

[[noreturn]] void fail_subject(std::size_t i, const std::string& id, const std::string& what) {
  std::ostringstream os;
  os << "subject " << i << " (id \"" << id << "\"): " << what;
  throw std::invalid_argument(os.str());
}

}  // namespace

void validate(const Dataset& data) {
  for (std::size_t i = 0; i < data.subjects.size(); ++i) {
    const Subject& s = data.subjects[i];
    if (s.covariates.size() != data.n_covariates)
      fail_subject(i, s.id, "covariate count differs from dataset n_covariates");
    if (s.recurrent_times.size() != data.n_types)
      fail_subject(i, s.id, "recurrent time list count differs from dataset n_types");
    if (!(s.followup_end >= 0.0) || !std::isfinite(s.followup_end))
      fail_subject(i, s.id, "followup_end must be finite and >= 0");
    if (s.terminal_time) {
      if (!(*s.terminal_time > 0.0) || !std::isfinite(*s.terminal_time))
        fail_subject(i, s.id, "terminal time must be finite and > 0");
      if (*s.terminal_time > s.followup_end)
        fail_subject(i, s.id, "terminal time exceeds followup_end");
    }
    const double limit = s.risk_end();
    for (std::size_t q = 0; q < s.recurrent_times.size(); ++q) {
      double prev = 0.0;
      for (double t : s.recurrent_times[q]) {
        if (!(t > 0.0) || !std::isfinite(t))
          fail_subject(i, s.id, "recurrent event time must be finite and > 0");
        if (t <= prev && prev > 0.0)
          fail_subject(i, s.id, "recurrent times within a type must be strictly increasing");
        if (t > limit) {
          std::ostringstream os;
          os << "type-" << (q + 1) << " event at " << t << " after risk end " << limit;
          fail_subject(i, s.id, os.str());
        }
        prev = t;
      }
    }
  }
}

std::size_t TimeGrid::index_of(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t)
    throw std::invalid_argument("time is not a grid point");
  return static_cast<std::size_t>(it - times.begin());
}

TimeGrid build_time_grid(const Dataset& data) {
  std::vector<double> all;
  for (const Subject& s : data.subjects) {
    for (const auto& times : s.recurrent_times) all.insert(all.end(), times.begin(), times.end());
    if (s.terminal_observed()) all.push_back(*s.terminal_time);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return TimeGrid{std::move(all)};
}

int counting_increment(const Subject& s, std::size_t process, std::size_t n_types,
                       const TimeGrid& grid, std::size_t grid_index) {
  if (process > n_types) throw std::invalid_argument("invalid process index");
  if (grid_index < 1 || grid_index > grid.size())
    throw std::invalid_argument("grid index out of range");
  const double t = grid.times[grid_index - 1];
  if (t > s.risk_end()) return 0;
  if (process == 0) return s.terminal_observed() && *s.terminal_time == t ? 1 : 0;
  const auto& times = s.recurrent_times[process - 1];
  return static_cast<int>(std::count(times.begin(), times.end(), t));
}

int at_risk(const Subject& s, double t) { return s.risk_end() >= t ? 1 : 0; }

std::vector<double> history_vector(const Subject& s, double t) {
  const double limit = s.risk_end();
  std::vector<double> h(s.recurrent_times.size(), 0.0);
  for (std::size_t q = 0; q < s.recurrent_times.size(); ++q) {
    const auto& times = s.recurrent_times[q];
    for (double v : times) {
      if (v < t && v <= limit) h[q] += 1.0;
    }
  }
  return h;
}

DatasetIndex build_index(const Dataset& data) {
  validate(data);
  DatasetIndex idx;
  idx.data = &data;
  idx.grid = build_time_grid(data);

  const std::size_t n = data.size();
  const std::size_t nq = data.n_types;
  const std::size_t m = idx.grid.size();

  idx.layout.resize(n);
  idx.events.assign(nq + 1, {});
  idx.grid_event_counts.assign(nq + 1, std::vector<double>(m, 0.0));
  idx.subject_event_counts.assign(nq + 1, std::vector<double>(n, 0.0));

  for (std::size_t i = 0; i < n; ++i) {
    const Subject& s = data.subjects[i];
    SubjectLayout& lay = idx.layout[i];
    lay.risk_limit = s.risk_end();
    lay.grid_limit = static_cast<std::size_t>(
        std::upper_bound(idx.grid.times.begin(), idx.grid.times.end(), lay.risk_limit) -
        idx.grid.times.begin());

    // Merge the subject's own events across types in time order; the history
    // vector steps up just after each event time.
    struct Own {
      double time;
      std::size_t type;  // 0-based recurrent type
    };
    std::vector<Own> own;
    for (std::size_t q = 0; q < nq; ++q)
      for (double t : s.recurrent_times[q]) own.push_back({t, q});
    std::sort(own.begin(), own.end(), [](const Own& a, const Own& b) { return a.time < b.time; });

    std::vector<double> running(nq, 0.0);
    if (lay.grid_limit > 0) lay.segments.push_back({0, running});

    std::size_t k = 0;
    while (k < own.size()) {
      const double t = own[k].time;
      const std::size_t gi = idx.grid.index_of(t);
      // All events at this exact time share the pre-t history (left limit).
      const std::vector<double> before = running;
      while (k < own.size() && own[k].time == t) {
        const std::size_t q = own[k].type;
        idx.events[q + 1].push_back({i, gi, before});
        idx.grid_event_counts[q + 1][gi] += 1.0;
        idx.subject_event_counts[q + 1][i] += 1.0;
        running[q] += 1.0;
        ++k;
      }
      const std::size_t boundary = gi + 1;
      if (boundary < lay.grid_limit) lay.segments.push_back({boundary, running});
    }

    if (s.terminal_observed()) {
      const std::size_t gi = idx.grid.index_of(*s.terminal_time);
      idx.events[0].push_back({i, gi, history_vector(s, *s.terminal_time)});
      idx.grid_event_counts[0][gi] += 1.0;
      idx.subject_event_counts[0][i] += 1.0;
    }
  }
  return idx;
}

}  // namespace jdfm
