#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "jch/evolution.hpp"
#include "jch/experiments.hpp"

namespace jch {

/// 12 significant digits, locale independent.
inline std::string format_csv_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// time, sink, photon_i…, exciton_i…, trace, min_eig_flag
inline void write_csv(const TrajectoryRecord& rec, std::ostream& out) {
  out << "time";
  for (const auto& c : rec.columns) out << ',' << c.name;
  out << '\n';
  for (std::size_t r = 0; r < rec.times.size(); ++r) {
    out << format_csv_number(rec.times[r]);
    for (const auto& c : rec.columns) out << ',' << format_csv_number(c.values[r]);
    out << '\n';
  }
}

/// axis1, [axis2], value, capped: one row per cell in grid order.
inline void write_csv(const SweepResult& res, std::ostream& out) {
  out << to_string(res.spec.axis1.param);
  if (res.spec.axis2) out << ',' << to_string(res.spec.axis2->param);
  out << ",value,capped\n";
  for (std::size_t i = 0; i < res.rows; ++i)
    for (std::size_t j = 0; j < res.cols; ++j) {
      out << format_csv_number(res.spec.axis1.values[i]);
      if (res.spec.axis2) out << ',' << format_csv_number(res.spec.axis2->values[j]);
      out << ',' << format_csv_number(res.value(i, j)) << ',' << (res.capped(i, j) ? 1 : 0) << '\n';
    }
}

template <class Record>
void write_csv(const Record& rec, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(rec, f);
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace jch
