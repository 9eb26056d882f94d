#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cplab/density.hpp"
#include "cplab/rate_history.hpp"

namespace cp {

// Time-indexed record of a run: named diagnostic columns sampled at the
// recording cadence, the full-resolution Lambda history, and optional
// density snapshots.
struct Trajectory {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  RateHistory history;
  std::vector<std::pair<double, GridDensity>> snapshots;

  std::size_t col(std::string_view name) const;  // throws on unknown name
  std::vector<double> column(std::string_view name) const;
  double value(std::size_t row, std::string_view name) const;
  double back(std::string_view name) const;
};

// 17 significant digits, locale-independent; the determinism contract for
// every CSV the project writes.
std::string format_g17(double v);

void write_csv(std::ostream& os, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

// Writes the named subset of columns (all when `which` is empty).
void write_trajectory_csv(std::ostream& os, const Trajectory& t,
                          const std::vector<std::string>& which = {});

}  // namespace cp
