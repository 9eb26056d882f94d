#include "cplab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cp {

namespace {

double simpson(double fa, double fm, double fb, double h) {
  return h * (fa + 4.0 * fm + fb) / 6.0;
}

double adaptive(const std::function<double(double)>& f, double a, double b,
                double fa, double fm, double fb, double whole, double tol,
                int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  // second stop: once the local error is at machine-level relative accuracy
  // no further splitting can help, whatever the global tolerance demands
  const double machine_floor = 1e-14 * (std::fabs(left) + std::fabs(right));
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol ||
      std::fabs(delta) <= machine_floor) {
    return left + right + delta / 15.0;
  }
  return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol) {
  if (a == b) return 0.0;
  // coarse scan first so the tolerance is anchored to the true magnitude,
  // not to a 3-point estimate that can miss all the mass
  constexpr int kPanels = 16;
  double fs[2 * kPanels + 1];
  const double h = (b - a) / (2 * kPanels);
  for (int i = 0; i <= 2 * kPanels; ++i) fs[i] = f(a + h * i);
  double scale = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    scale += std::fabs(simpson(fs[2 * p], fs[2 * p + 1], fs[2 * p + 2], 2.0 * h));
  }
  const double tol =
      (std::max(abs_tol, rel_tol * scale) + 1e-300) / kPanels;
  double sum = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double pa = a + 2.0 * h * p;
    const double pb = pa + 2.0 * h;
    const double whole = simpson(fs[2 * p], fs[2 * p + 1], fs[2 * p + 2], 2.0 * h);
    sum += adaptive(f, pa, pb, fs[2 * p], fs[2 * p + 1], fs[2 * p + 2], whole, tol, 40);
  }
  return sum;
}

double trapezoid_samples(std::span<const double> x, std::span<const double> f) {
  if (x.size() != f.size()) throw std::invalid_argument("size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    sum += 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
  }
  return sum;
}

double integrate_samples(std::span<const double> x, std::span<const double> f) {
  if (x.size() != f.size()) throw std::invalid_argument("size mismatch");
  const std::size_t n = x.size();
  if (n < 3) return trapezoid_samples(x, f);
  double sum = 0.0;
  std::size_t i = 0;
  // pairs of intervals; quadratic through each triple
  for (; i + 2 < n; i += 2) {
    const double h0 = x[i + 1] - x[i];
    const double h1 = x[i + 2] - x[i + 1];
    const double hs = h0 + h1;
    sum += hs / 6.0 *
           ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] +
            (2.0 - h0 / h1) * f[i + 2]);
  }
  if (i + 1 < n) {
    // one interval left: integrate the quadratic through the last triple
    const double h0 = x[n - 2] - x[n - 3];
    const double h1 = x[n - 1] - x[n - 2];
    sum += (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1)) * f[n - 1] +
           (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0) * f[n - 2] -
           h1 * h1 * h1 / (6.0 * h0 * (h0 + h1)) * f[n - 3];
  }
  return sum;
}

std::vector<double> simpson_weights(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> w(n, 0.0);
  if (n < 3) {
    if (n == 2) {
      w[0] = w[1] = 0.5 * (x[1] - x[0]);
    }
    return w;
  }
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) {
    const double h0 = x[i + 1] - x[i];
    const double h1 = x[i + 2] - x[i + 1];
    const double hs = h0 + h1;
    w[i] += hs / 6.0 * (2.0 - h1 / h0);
    w[i + 1] += hs / 6.0 * (hs * hs / (h0 * h1));
    w[i + 2] += hs / 6.0 * (2.0 - h0 / h1);
  }
  if (i + 1 < n) {
    const double h0 = x[n - 2] - x[n - 3];
    const double h1 = x[n - 1] - x[n - 2];
    w[n - 1] += (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
    w[n - 2] += (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
    w[n - 3] -= h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
  }
  return w;
}

std::vector<double> cumulative_tail_trapezoid(std::span<const double> x,
                                              std::span<const double> f) {
  if (x.size() != f.size()) throw std::invalid_argument("size mismatch");
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = x.size(); i-- > 1;) {
    out[i - 1] = out[i] + 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  }
  return out;
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() != ys_.size() || xs_.size() < 2) {
    throw std::invalid_argument("PiecewiseLinear: need matching arrays, n >= 2");
  }
  for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
    if (!(xs_[i] < xs_[i + 1])) {
      throw std::invalid_argument("PiecewiseLinear: grid not increasing");
    }
  }
}

double PiecewiseLinear::operator()(double x) const {
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return ys_[i] + t * (ys_[i + 1] - ys_[i]);
}

}  // namespace cp
