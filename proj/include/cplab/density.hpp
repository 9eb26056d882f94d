#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cp {

// Nonnegative density sampled on a strictly increasing nonnegative grid.
// truncation_mass estimates what lies beyond the last grid point; a state is
// valid while that stays a negligible fraction of the total.
struct GridDensity {
  std::vector<double> grid;
  std::vector<double> values;
  double truncation_mass = 0.0;  // integral of the density beyond the grid
  double truncation_tail = 0.0;  // integral of the survival beyond the grid

  void validate() const;  // throws std::invalid_argument on a malformed state
};

double total_mass(const GridDensity& d);
double first_moment(const GridDensity& d);

// Uniform grid helper.
std::vector<double> uniform_grid(double a, double b, std::size_t n);

// Samples f on the given grid.
GridDensity sample_density(const std::vector<double>& grid,
                           const std::function<double(double)>& f);

// Plateau of height 1 on [a, b] with linear ramps of width `ramp` inside both
// ends, sampled on n points; the left ramp may start at a = 0 so the density
// vanishes at the origin while keeping a positive slope there.
GridDensity ramped_uniform_density(double a, double b, double ramp, std::size_t n);

// Scales values so the first moment is exactly one.
void normalize_first_moment(GridDensity& d);

}  // namespace cp
