#include "cplab/density.hpp"

#include <cmath>
#include <stdexcept>

#include "cplab/quadrature.hpp"

namespace cp {

void GridDensity::validate() const {
  if (grid.size() != values.size() || grid.size() < 2) {
    throw std::invalid_argument("GridDensity: need matching arrays, n >= 2");
  }
  if (grid.front() < 0.0) {
    throw std::invalid_argument("GridDensity: grid must be nonnegative");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || !std::isfinite(values[i]) || values[i] < 0.0) {
      throw std::invalid_argument("GridDensity: values must be finite and >= 0");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("GridDensity: grid must be strictly increasing");
    }
  }
}

double total_mass(const GridDensity& d) {
  return trapezoid_samples(d.grid, d.values) + d.truncation_mass;
}

double first_moment(const GridDensity& d) {
  std::vector<double> xf(d.grid.size());
  for (std::size_t i = 0; i < d.grid.size(); ++i) xf[i] = d.grid[i] * d.values[i];
  // beyond-grid contribution: x_last * mass + integrated survival out there
  return trapezoid_samples(d.grid, xf) + d.grid.back() * d.truncation_mass +
         d.truncation_tail;
}

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
  if (n < 2 || !(b > a)) throw std::invalid_argument("uniform_grid: bad range");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  g.back() = b;
  return g;
}

GridDensity sample_density(const std::vector<double>& grid,
                           const std::function<double(double)>& f) {
  GridDensity d;
  d.grid = grid;
  d.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) d.values[i] = f(grid[i]);
  d.validate();
  return d;
}

GridDensity ramped_uniform_density(double a, double b, double ramp, std::size_t n) {
  if (!(b > a) || ramp <= 0.0 || 2.0 * ramp >= (b - a)) {
    throw std::invalid_argument("ramped_uniform_density: bad geometry");
  }
  auto profile = [&](double x) {
    if (x <= a || x >= b) return 0.0;
    if (x < a + ramp) return (x - a) / ramp;
    if (x > b - ramp) return (b - x) / ramp;
    return 1.0;
  };
  return sample_density(uniform_grid(a, b, n), profile);
}

void normalize_first_moment(GridDensity& d) {
  const double j = first_moment(d);
  if (!(j > 0.0)) throw std::domain_error("normalize_first_moment: zero moment");
  for (double& v : d.values) v /= j;
}

}  // namespace cp
