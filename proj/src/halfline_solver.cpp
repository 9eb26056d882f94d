#include "cplab/halfline_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace cp::halfline {

double bernoulli(double p) {
  if (std::fabs(p) < 1e-5) {
    return 1.0 - 0.5 * p + p * p / 12.0;
  }
  if (p > 700.0) return 0.0;
  return p / std::expm1(p);
}

Grid Grid::build(double layer_spacing, double layer_width, double growth,
                 double h_cap, double x_max) {
  if (layer_spacing <= 0.0 || growth <= 1.0 || x_max <= layer_width) {
    throw std::invalid_argument("Grid::build: bad parameters");
  }
  Grid g;
  g.x.push_back(0.0);
  while (g.x.back() < layer_width) g.x.push_back(g.x.back() + layer_spacing);
  double h = layer_spacing;
  while (g.x.back() < x_max) {
    h = std::min(h * growth, std::max(h_cap, layer_spacing));
    g.x.push_back(g.x.back() + h);
  }
  return g;
}

void Grid::extend(double x_max_new, double h_cap, double growth) {
  double h = x.back() - x[x.size() - 2];
  while (x.back() < x_max_new) {
    h = std::min(h * growth, h_cap);
    x.push_back(x.back() + h);
  }
}

std::vector<double> dual_cell_weights(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> w(n);
  w[0] = 0.5 * (x[1] - x[0]);
  for (std::size_t i = 1; i + 1 < n; ++i) w[i] = 0.5 * (x[i + 1] - x[i - 1]);
  w[n - 1] = 0.5 * (x[n - 1] - x[n - 2]);
  return w;
}

StepWorkspace::StepWorkspace(std::size_t n)
    : lower_(n), diag_(n), upper_(n), rhs_(n), af_(n), bf_(n), face_flux_(n),
      tmp_(n) {}

void StepWorkspace::step(const std::vector<double>& x,
                         const std::vector<double>& c_old, double dt,
                         double theta, double eps,
                         const std::function<double(double)>& face_drift,
                         double left_bc, std::vector<double>& c_new) {
  const std::size_t n = x.size();
  if (c_old.size() != n) throw std::invalid_argument("step: size mismatch");
  if (lower_.size() < n) {
    lower_.resize(n);
    diag_.resize(n);
    upper_.resize(n);
    rhs_.resize(n);
    af_.resize(n);
    bf_.resize(n);
    face_flux_.resize(n);
    tmp_.resize(n);
  }
  const double d = 0.5 * eps;

  // face coefficients: H_f = af*c_right + bf*c_left
  for (std::size_t f = 0; f + 1 < n; ++f) {
    const double h = x[f + 1] - x[f];
    const double v = face_drift(0.5 * (x[f] + x[f + 1]));
    const double p = v * h / d;
    af_[f] = (d / h) * bernoulli(-p);
    bf_[f] = -(d / h) * bernoulli(p);
  }

  const auto w = dual_cell_weights(x);

  // explicit part: rhs = c_old + (1-theta) dt L c_old, with c0 fixed at the
  // boundary value on both levels
  auto flux_old = [&](std::size_t f) {
    const double cl = (f == 0) ? left_bc : c_old[f];
    return af_[f] * c_old[f + 1] + bf_[f] * cl;
  };
  for (std::size_t i = 1; i < n; ++i) {
    const double hi = (i + 1 < n) ? flux_old(i) : 0.0;
    const double lo = flux_old(i - 1);
    rhs_[i] = c_old[i] + (1.0 - theta) * dt * (hi - lo) / w[i];
  }

  // implicit part: (I - theta dt L) c_new = rhs
  for (std::size_t i = 1; i < n; ++i) {
    const double s = theta * dt / w[i];
    double dg = 1.0;
    double lw = 0.0, up = 0.0;
    if (i + 1 < n) {
      // +H_{i+1/2} = af[i] c_{i+1} + bf[i] c_i
      dg -= s * bf_[i];
      up = -s * af_[i];
    }
    // -H_{i-1/2} = -(af[i-1] c_i + bf[i-1] c_{i-1})
    dg += s * af_[i - 1];
    if (i >= 2) {
      lw = s * bf_[i - 1];
    } else {
      rhs_[i] -= s * bf_[0] * left_bc;  // known boundary value
    }
    lower_[i] = lw;
    diag_[i] = dg;
    upper_[i] = up;
  }

  // Thomas solve on rows 1..n-1
  tmp_[1] = upper_[1] / diag_[1];
  rhs_[1] = rhs_[1] / diag_[1];
  for (std::size_t i = 2; i < n; ++i) {
    const double m = diag_[i] - lower_[i] * tmp_[i - 1];
    tmp_[i] = upper_[i] / m;
    rhs_[i] = (rhs_[i] - lower_[i] * rhs_[i - 1]) / m;
  }
  c_new.resize(n);
  c_new[n - 1] = rhs_[n - 1];
  for (std::size_t i = n - 1; i-- > 1;) {
    c_new[i] = rhs_[i] - tmp_[i] * c_new[i + 1];
  }
  c_new[0] = left_bc;

  // theta-averaged face fluxes of the accepted step
  for (std::size_t f = 0; f + 1 < n; ++f) {
    const double cl_new = (f == 0) ? left_bc : c_new[f];
    const double h_new = af_[f] * c_new[f + 1] + bf_[f] * cl_new;
    face_flux_[f] = theta * h_new + (1.0 - theta) * flux_old(f);
  }
  face_flux_[n - 1] = 0.0;
}

double StepWorkspace::first_moment_drift(const std::vector<double>& x) const {
  const std::size_t n = x.size();
  double acc = -x[1] * face_flux_[0];
  for (std::size_t f = 1; f + 1 < n; ++f) {
    acc -= (x[f + 1] - x[f]) * face_flux_[f];
  }
  return acc;
}

}  // namespace cp::halfline
