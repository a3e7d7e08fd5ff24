#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace jdfm {

// One study participant: covariates, per-type recurrent event times on the
// calendar time scale, and the end of follow-up (administrative censoring
// and/or an absorbing terminal event).
struct Subject {
  std::string id;
  std::vector<double> covariates;                    // X_i, length p
  double followup_end = 0.0;                         // tau_i
  std::optional<double> terminal_time;               // T_0i, present iff observed
  std::vector<std::vector<double>> recurrent_times;  // per type, strictly increasing

  bool terminal_observed() const { return terminal_time.has_value(); }

  // End of the at-risk period: min(followup_end, terminal time).
  double risk_end() const {
    return terminal_time ? std::min(followup_end, *terminal_time) : followup_end;
  }
};

struct Dataset {
  std::vector<Subject> subjects;
  std::size_t n_types = 0;       // Q, number of recurrent event types
  std::size_t n_covariates = 0;  // p

  std::size_t size() const { return subjects.size(); }
};

// Checks all structural invariants (shared p and Q, positive strictly
// increasing times within type, no event past min(followup_end, terminal),
// terminal within follow-up). Throws std::invalid_argument naming the subject.
void validate(const Dataset& data);

// Pooled grid of the distinct observed event times t_(1) < ... < t_(M),
// recurrent and terminal alike, with an implicit t_(0) = 0. Censoring-only
// times never enter the grid.
struct TimeGrid {
  std::vector<double> times;

  std::size_t size() const { return times.size(); }
  // 0-based position of an exact grid time; throws std::invalid_argument if absent.
  std::size_t index_of(double t) const;
};

TimeGrid build_time_grid(const Dataset& data);

// Events of `process` (0 = terminal, 1..Q = recurrent type) the subject has
// at exactly t_(j); j is 1-based as in the grid notation.
int counting_increment(const Subject& s, std::size_t process, std::size_t n_types,
                       const TimeGrid& grid, std::size_t grid_index);

// At-risk indicator Y(t) = 1{min(followup_end, terminal) >= t}.
int at_risk(const Subject& s, double t);

// Per-type counts of the subject's recurrent events strictly before t
// (left-limit convention), capped at the risk period.
std::vector<double> history_vector(const Subject& s, double t);

// ---------------------------------------------------------------------------
// Grid-aligned index. A subject's history vector is a step function that only
// changes just after the subject's own events, so the at-risk grid positions
// partition into a few segments of constant history; likelihood and kernel
// sums over the grid collapse to sums over segments via prefix sums.

struct HistorySegment {
  std::size_t begin = 0;         // first grid position (0-based) of the segment
  std::vector<double> history;   // past-event counts, constant over the segment
};

struct EventRecord {
  std::size_t subject = 0;
  std::size_t grid_index = 0;    // 0-based grid position of the event
  std::vector<double> history;   // history vector at the event time (left limit)
};

struct SubjectLayout {
  double risk_limit = 0.0;               // min(followup_end, terminal)
  std::size_t grid_limit = 0;            // # leading grid positions with t <= risk_limit
  std::vector<HistorySegment> segments;  // partition of [0, grid_limit)
};

struct DatasetIndex {
  const Dataset* data = nullptr;
  TimeGrid grid;
  std::vector<SubjectLayout> layout;                    // per subject
  std::vector<std::vector<EventRecord>> events;         // [process 0..Q]
  std::vector<std::vector<double>> grid_event_counts;   // [process][grid pos]
  std::vector<std::vector<double>> subject_event_counts;  // [process][subject]

  std::size_t n() const { return data->size(); }
  std::size_t q() const { return data->n_types; }
  std::size_t p() const { return data->n_covariates; }
  std::size_t m() const { return grid.size(); }
};

// Validates the dataset and builds the index.
DatasetIndex build_index(const Dataset& data);

}  // namespace jdfm
