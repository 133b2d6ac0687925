#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace p2d2 {

struct TraceRecord {
  int iter = 0;
  std::optional<double> rel_sq_error;
  std::optional<double> consensus_residual;
  std::optional<double> objective;
  std::optional<double> fixed_point_residual;
  std::optional<double> lyapunov;
  std::optional<double> elapsed_ms;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Per-iteration history of one run. Record 0 is the initial point.
struct IterationTrace {
  std::string form;
  /// Emitted as "# key=value" comment lines ahead of the CSV header.
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<TraceRecord> records;

  friend bool operator==(const IterationTrace&, const IterationTrace&) = default;
};

inline constexpr const char* kTraceHeader =
    "iter,rel_sq_error,consensus_residual,objective,fixed_point_residual,lyapunov,elapsed_ms";

/// Doubles are written with 17 significant digits so the CSV parses back exactly.
void write_trace_csv(std::ostream& out, const IterationTrace& trace);
void write_trace_csv(const std::string& path, const IterationTrace& trace);
IterationTrace read_trace_csv(std::istream& in);
IterationTrace read_trace_csv(const std::string& path);

}  // namespace p2d2
