#include "p2d2/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "p2d2/error.hpp"

namespace p2d2 {

namespace {

void put(std::ostream& out, const std::optional<double>& v) {
  if (!v) return;
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, *v, std::chars_format::general, 17);
  out.write(buf, end - buf);
}

std::optional<double> get(const std::string& cell, int lineno) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || end != cell.data() + cell.size()) {
    // from_chars rejects "inf"/"nan" spellings on some toolchains
    try {
      std::size_t used = 0;
      v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) + ": bad number '" + cell + "'");
    }
  }
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "# form=" << trace.form << '\n';
  for (const auto& [key, value] : trace.metadata) out << "# " << key << '=' << value << '\n';
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.iter << ',';
    put(out, r.rel_sq_error);
    out << ',';
    put(out, r.consensus_residual);
    out << ',';
    put(out, r.objective);
    out << ',';
    put(out, r.fixed_point_residual);
    out << ',';
    put(out, r.lyapunov);
    out << ',';
    put(out, r.elapsed_ms);
    out << '\n';
  }
}

void write_trace_csv(const std::string& path, const IterationTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write trace to " + path);
  write_trace_csv(out, trace);
}

IterationTrace read_trace_csv(std::istream& in) {
  IterationTrace trace;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with("# ")) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(2, eq - 2);
      std::string value = line.substr(eq + 1);
      if (key == "form")
        trace.form = std::move(value);
      else
        trace.metadata.emplace_back(std::move(key), std::move(value));
      continue;
    }
    if (!header_seen) {
      if (line != kTraceHeader) throw Error(ErrorCode::ParseError, "unexpected trace header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 7)
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) + ": expected 7 fields");
    TraceRecord r;
    r.iter = static_cast<int>(get(cells[0], lineno).value_or(0.0));
    r.rel_sq_error = get(cells[1], lineno);
    r.consensus_residual = get(cells[2], lineno);
    r.objective = get(cells[3], lineno);
    r.fixed_point_residual = get(cells[4], lineno);
    r.lyapunov = get(cells[5], lineno);
    r.elapsed_ms = get(cells[6], lineno);
    trace.records.push_back(r);
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "trace has no header line");
  return trace;
}

IterationTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return read_trace_csv(in);
}

}  // namespace p2d2
