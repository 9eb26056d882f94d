#include "cplab/trajectory.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace cp {

std::size_t Trajectory::col(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("Trajectory: unknown column " + std::string(name));
}

std::vector<double> Trajectory::column(std::string_view name) const {
  const std::size_t i = col(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(i));
  return out;
}

double Trajectory::value(std::size_t row, std::string_view name) const {
  return rows.at(row).at(col(name));
}

double Trajectory::back(std::string_view name) const {
  if (rows.empty()) throw std::out_of_range("Trajectory: no rows");
  return rows.back().at(col(name));
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    os << (i ? "," : "") << columns[i];
  }
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      os << (i ? "," : "") << format_g17(r[i]);
    }
    os << "\n";
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t,
                          const std::vector<std::string>& which) {
  if (which.empty()) {
    write_csv(os, t.columns, t.rows);
    return;
  }
  std::vector<std::size_t> idx;
  for (const auto& name : which) idx.push_back(t.col(name));
  std::vector<std::vector<double>> sub;
  sub.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    std::vector<double> s;
    s.reserve(idx.size());
    for (std::size_t i : idx) s.push_back(r.at(i));
    sub.push_back(std::move(s));
  }
  write_csv(os, which, sub);
}

}  // namespace cp
