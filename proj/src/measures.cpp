#include "cplab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cplab/quadrature.hpp"

namespace cp {

SelfSimilarFamily::SelfSimilarFamily(double b) : beta(b) {
  if (!(b > 0.0)) throw std::invalid_argument("SelfSimilarFamily: beta must be > 0");
}

double SelfSimilarFamily::support_end() const {
  if (beta < 1.0) return 1.0 / (1.0 - beta);
  return std::numeric_limits<double>::infinity();
}

double SelfSimilarFamily::survival(double x) const {
  if (x <= 0.0) return 1.0;
  if (beta == 1.0) return std::exp(-x);
  const double s = 1.0 - beta;
  const double base = 1.0 - s * x;
  if (base <= 0.0) return 0.0;  // only reachable for beta < 1
  return std::pow(base, beta / s);
}

double SelfSimilarFamily::density(double x) const {
  if (x < 0.0) return 0.0;
  if (beta == 1.0) return std::exp(-x);
  const double s = 1.0 - beta;
  const double base = 1.0 - s * x;
  if (base <= 0.0) return 0.0;
  return beta * std::pow(base, beta / s - 1.0);
}

double SelfSimilarFamily::tail_integral(double x) const {
  if (x <= 0.0) return 1.0;
  if (beta == 1.0) return std::exp(-x);
  const double s = 1.0 - beta;
  const double base = 1.0 - s * x;
  if (base <= 0.0) return 0.0;
  return std::pow(base, 1.0 / s);
}

}  // namespace cp

namespace cp::measures {

TailProfile tail_functions(const GridDensity& d) {
  d.validate();
  TailProfile p;
  p.x = d.grid;
  p.w = cumulative_tail_trapezoid(d.grid, d.values);
  for (double& v : p.w) v += d.truncation_mass;
  if (!(p.w.front() > 0.0)) {
    throw std::domain_error("tail_functions: density has no mass");
  }
  p.h = cumulative_tail_trapezoid(d.grid, p.w);
  for (double& v : p.h) v += d.truncation_tail;
  const double guard = TailProfile::kWeightGuard * p.w.front();
  p.beta.resize(p.x.size());
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    p.beta[i] = (p.w[i] > guard)
                    ? d.values[i] * p.h[i] / (p.w[i] * p.w[i])
                    : std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

double residual_mean(const GridDensity& d, double x) {
  const TailProfile p = tail_functions(d);
  if (x < p.x.front() || x > p.x.back()) {
    throw std::out_of_range("residual_mean: x outside the grid");
  }
  const PiecewiseLinear w(p.x, p.w), h(p.x, p.h);
  const double wx = w(x);
  if (!(wx > TailProfile::kWeightGuard * p.w.front())) {
    throw std::domain_error("residual_mean: tail exhausted at x");
  }
  return h(x) / wx;
}

GridDensity selfsimilar_init(double beta, const std::vector<double>& grid) {
  const SelfSimilarFamily fam(beta);
  GridDensity d;
  d.grid = grid;
  d.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) d.values[i] = fam.density(grid[i]);
  d.truncation_mass = fam.survival(grid.back());
  d.truncation_tail = fam.tail_integral(grid.back());
  d.validate();
  return d;
}

std::vector<double> selfsimilar_grid(double beta, std::size_t n) {
  if (n < 16) throw std::invalid_argument("selfsimilar_grid: n too small");
  const SelfSimilarFamily fam(beta);
  std::vector<double> g;
  g.reserve(n);
  if (beta < 1.0) {
    // geometric clustering in the distance to the support edge: keeps the
    // trapezoid rule accurate against the unbounded beta < 1/2 density. The
    // grid stops a relative 1e-6 short of the edge; closer in, 1-(1-beta)x
    // cancels catastrophically in doubles. The sliver beyond is carried
    // analytically as truncation metadata by selfsimilar_init.
    const double end = fam.support_end();
    const double w_min = 1e-6;
    const double step = std::log(w_min) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::exp(step * static_cast<double>(i));
      g.push_back(end * (1.0 - w));
    }
  } else {
    // linear out to a few means, then geometric into the tail until the
    // integrated tail is ~1e-10 (exponential) or smaller (power law)
    const double x_lin = 4.0;
    double x_stop = 45.0;
    if (beta > 1.0) {
      // tail_integral = (1 + (beta-1)x)^{-1/(beta-1)} <= 1e-10
      x_stop = (std::pow(1e-10, -(beta - 1.0)) - 1.0) / (beta - 1.0);
    }
    const std::size_t n_lin = n / 2;
    for (std::size_t i = 0; i < n_lin; ++i) {
      g.push_back(x_lin * static_cast<double>(i) / static_cast<double>(n_lin));
    }
    const std::size_t n_geo = n - n_lin;
    const double ratio = std::log(x_stop / x_lin) / static_cast<double>(n_geo - 1);
    for (std::size_t i = 0; i < n_geo; ++i) {
      g.push_back(x_lin * std::exp(ratio * static_cast<double>(i)));
    }
  }
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

double ks_exponential(const GridDensity& d) {
  const TailProfile p = tail_functions(d);
  const double mass = p.w.front();
  const double mu = p.h.front() / mass;
  if (!(mu > 0.0)) throw std::domain_error("ks_exponential: zero mean");
  double sup = 0.0;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    sup = std::max(sup, std::fabs(p.w[i] / mass - std::exp(-p.x[i] / mu)));
    if (i + 1 < p.x.size()) {
      const double xm = 0.5 * (p.x[i] + p.x[i + 1]);
      const double wm = 0.5 * (p.w[i] + p.w[i + 1]);
      sup = std::max(sup, std::fabs(wm / mass - std::exp(-xm / mu)));
    }
  }
  return sup;
}

double mean(const GridDensity& d) {
  const double mass = total_mass(d);
  if (!(mass > 0.0)) throw std::domain_error("mean: zero total mass");
  return first_moment(d) / mass;
}

}  // namespace cp::measures
