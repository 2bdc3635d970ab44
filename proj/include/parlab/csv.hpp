#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "parlab/errors.hpp"
#include "parlab/evolution.hpp"

namespace parlab {

// RFC-4180 CSV output: CRLF line endings, mandatory header row, floats at 17
// significant digits.

inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error(errc::config_error, "cannot open " + path + " for writing");
  }

  void header(const std::vector<std::string>& cols) { row_raw(cols); }

  void row(const std::vector<double>& vals) {
    std::vector<std::string> cells;
    cells.reserve(vals.size());
    for (double v : vals) cells.push_back(csv_double(v));
    row_raw(cells);
  }

 private:
  void row_raw(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out_ << ',';
      out_ << cells[k];
    }
    out_ << "\r\n";
  }

  std::ofstream out_;
};

/// Trace CSV: one row per (t, node); columns t, flattened node coordinates,
/// value.
inline void write_trace_csv(const std::string& path, const EvolutionTrace& trace) {
  CsvWriter csv(path);
  if (trace.grid->dim() == 1)
    csv.header({"t", "y1", "value"});
  else
    csv.header({"t", "y1", "y2", "value"});
  for (std::size_t k = 0; k < trace.slices.size(); ++k) {
    double t = trace.time_at(static_cast<long long>(k));
    for (int i = 0; i < trace.grid->size(); ++i) {
      const auto& y = trace.grid->node(i);
      if (trace.grid->dim() == 1)
        csv.row({t, y[0], trace.slices[k][i]});
      else
        csv.row({t, y[0], y[1], trace.slices[k][i]});
    }
  }
}

inline void write_profile_csv(const std::string& path, const SupProfile& prof) {
  CsvWriter csv(path);
  csv.header({"t", "u_hat"});
  for (std::size_t k = 0; k < prof.times.size(); ++k) csv.row({prof.times[k], prof.values[k]});
}

}  // namespace parlab
