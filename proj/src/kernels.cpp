#include "cplab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cplab/normal.hpp"
#include "cplab/quadrature.hpp"

namespace cp::kernels {

namespace {
constexpr double kQuadRelTol = 1e-11;
}

KernelMoments moments(const RateHistory& A, double s, double t) {
  if (!std::isfinite(s) || !std::isfinite(t)) {
    throw std::invalid_argument("moments: non-finite time");
  }
  if (s > t) throw std::invalid_argument("moments: need s <= t");
  KernelMoments out;
  out.s = s;
  out.t = t;
  if (s == t) {
    A.lambda(s);  // range check
    return out;
  }

  const auto& times = A.times();
  const auto& lams = A.lambdas();
  const double e_total = A.inv_lambda_integral(s, t);

  // integral of exp(-F) and exp(-2F) with F(u) = integral_s^u A, walked
  // segment by segment so F stays closed-form inside each call
  double i1 = 0.0, i2 = 0.0;
  double e_before = 0.0;
  double a = s;
  std::size_t i = (times.size() > 1) ? A.segment_index(s) : 0;
  while (a < t) {
    double b = t;
    std::size_t j = i;
    if (times.size() > 1) {
      j = std::min(i, times.size() - 2);
      b = std::min(times[j + 1], t);
    }
    const double t0 = times.size() > 1 ? times[j] : times[0];
    const double t1 = times.size() > 1 ? times[j + 1] : times[0] + 1.0;
    const double l0 = times.size() > 1 ? lams[j] : lams[0];
    const double l1 = times.size() > 1 ? lams[j + 1] : lams[0];
    const double eb = e_before;
    auto fexp = [&](double u) {
      const double f = eb + RateHistory::segment_inv_integral(t0, l0, t1, l1, a, u);
      return std::exp(-f);
    };
    auto fexp2 = [&](double u) {
      const double f = eb + RateHistory::segment_inv_integral(t0, l0, t1, l1, a, u);
      return std::exp(-2.0 * f);
    };
    i1 += integrate(fexp, a, b, kQuadRelTol);
    i2 += integrate(fexp2, a, b, kQuadRelTol);
    e_before += RateHistory::segment_inv_integral(t0, l0, t1, l1, a, b);
    a = b;
    ++i;
  }

  out.m1 = std::exp(e_total);
  out.m2 = out.m1 * i1;
  out.sigma2 = out.m1 * out.m1 * i2;
  return out;
}

double whole_line_green(const RateHistory& A, double eps, double x, double y,
                        double T) {
  if (eps <= 0.0) throw std::invalid_argument("whole_line_green: eps must be > 0");
  if (!(T > A.t_front())) {
    throw std::invalid_argument("whole_line_green: need T > history start");
  }
  const KernelMoments m = moments(A, A.t_front(), T);
  const double var = eps * m.sigma2;
  const double sd = std::sqrt(var);
  return normal_pdf((x + m.m2 - m.m1 * y) / sd) / sd;
}

StandardizedOffset standardized_offset(const RateHistory& A, double y, double T) {
  const KernelMoments m = moments(A, A.t_front(), T);
  if (m.sigma2 <= 0.0) {
    throw std::domain_error("standardized_offset: sigma2 = 0 at T = history start");
  }
  const double sd = std::sqrt(m.sigma2);
  StandardizedOffset o;
  o.a = m.m2 / sd;
  o.b = m.m1 / sd;
  o.z = o.a - o.b * y;
  return o;
}

double drift(const RateHistory& A, double x, double y, double s) {
  const KernelMoments m = moments(A, A.t_front(), s);
  if (m.sigma2 <= 0.0) {
    throw std::domain_error("drift: sigma2 = 0 at s = history start");
  }
  return (A.inv_lambda(s) + 1.0 / m.sigma2) * x - 1.0 + m.m2 / m.sigma2 -
         m.m1 * y / m.sigma2;
}

double classical_path(const RateHistory& A, double x, double y, double s,
                      double T) {
  if (s > T) throw std::invalid_argument("classical_path: need s <= T");
  const double t0 = A.t_front();
  const KernelMoments ms = moments(A, t0, s);
  const KernelMoments mst = moments(A, s, T);
  // compose to the full interval; keeps the s -> t0 and s -> T limits exact
  const double sigma2_T = ms.sigma2 * mst.m1 * mst.m1 + mst.sigma2;
  if (sigma2_T <= 0.0) {
    throw std::domain_error("classical_path: degenerate interval");
  }
  const double num = x * mst.m1 * ms.sigma2 + y * ms.m1 * mst.sigma2 +
                     mst.m1 * mst.m2 * ms.sigma2 - ms.m2 * mst.sigma2;
  return num / sigma2_T;
}

double dispersion_gap(const RateHistory& A, double s) {
  const KernelMoments m = moments(A, A.t_front(), s);
  return (m.sigma2 - m.m2) / m.m1;
}

MomentTable::MomentTable(const RateHistory& A, std::size_t n) {
  if (n < 16) throw std::invalid_argument("MomentTable: n too small");
  const double t0 = A.t_front();
  const double t1 = A.t_back();
  s_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    s_.push_back(t0 + (t1 - t0) * static_cast<double>(i) /
                          static_cast<double>(n - 1));
  }
  // make sure history kinks are sampled
  for (double t : A.times()) s_.push_back(t);
  std::sort(s_.begin(), s_.end());
  s_.erase(std::unique(s_.begin(), s_.end()), s_.end());

  e_.assign(s_.size(), 0.0);
  p1_.assign(s_.size(), 0.0);
  p2_.assign(s_.size(), 0.0);
  inv_lam_.assign(s_.size(), 0.0);
  inv_lam_[0] = A.inv_lambda(s_[0]);
  for (std::size_t i = 1; i < s_.size(); ++i) {
    const double a = s_[i - 1];
    const double b = s_[i];
    const double de = A.inv_lambda_integral(a, b);
    const double e0 = e_[i - 1];
    // Simpson on the subinterval; the integrands are smooth there
    auto f1 = [&](double u) { return std::exp(-(e0 + A.inv_lambda_integral(a, u))); };
    auto f2 = [&](double u) {
      const double f = e0 + A.inv_lambda_integral(a, u);
      return std::exp(-2.0 * f);
    };
    const double m = 0.5 * (a + b);
    p1_[i] = p1_[i - 1] + (b - a) / 6.0 * (f1(a) + 4.0 * f1(m) + f1(b));
    p2_[i] = p2_[i - 1] + (b - a) / 6.0 * (f2(a) + 4.0 * f2(m) + f2(b));
    e_[i] = e0 + de;
    inv_lam_[i] = A.inv_lambda(b);
  }
}

double MomentTable::interp(const std::vector<double>& v, double s) const {
  if (s <= s_.front()) return v.front();
  if (s >= s_.back()) return v.back();
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - s_.begin()) - 1;
  const double w = (s - s_[i]) / (s_[i + 1] - s_[i]);
  return v[i] + w * (v[i + 1] - v[i]);
}

double MomentTable::m1(double s) const { return std::exp(interp(e_, s)); }
double MomentTable::m2(double s) const { return m1(s) * interp(p1_, s); }
double MomentTable::sigma2(double s) const {
  const double m = m1(s);
  return m * m * interp(p2_, s);
}
double MomentTable::inv_lambda(double s) const { return interp(inv_lam_, s); }
double MomentTable::dispersion_gap(double s) const {
  return (sigma2(s) - m2(s)) / m1(s);
}
double MomentTable::drift(double x, double y, double s) const {
  const double s2 = sigma2(s);
  if (!(s2 > 0.0)) throw std::domain_error("MomentTable::drift: sigma2 = 0");
  return (inv_lambda(s) + 1.0 / s2) * x - 1.0 + m2(s) / s2 - m1(s) * y / s2;
}

}  // namespace cp::kernels
