#include "cplab/wholeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cplab/gaussian_tails.hpp"
#include "cplab/kernels.hpp"
#include "cplab/normal.hpp"
#include "cplab/measures.hpp"
#include "cplab/quadrature.hpp"

namespace cp::wholeline {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Gaussian-mixture sums for a law with node means mu_i = m1*y_i - m2 and
// common standard deviation s, weighted by cw_i. Everything is accumulated
// against the largest log term so late-time deep-tail states keep working.
struct Mixture {
  const std::vector<double>& y;
  const std::vector<double>& cw;
  double m1, m2, s;

  // log of sum cw_i * Q(zhat_i(x)) : the tail beyond x
  double log_tail(double x) const {
    double base = -1e300;
    std::vector<double> logs(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double zh = (x - (m1 * y[i] - m2)) / s;
      logs[i] = log_normal_upper_tail(zh);
      base = std::max(base, logs[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += cw[i] * std::exp(logs[i] - base);
    return base + std::log(sum);
  }

  // log of sum cw_i * s * Q(zhat) * mean_beyond(zhat) : E[(X-x)+]-type sums
  double log_excess(double x) const {
    double base = -1e300;
    std::vector<double> logs(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double zh = (x - (m1 * y[i] - m2)) / s;
      logs[i] = log_normal_upper_tail(zh) +
                std::log(s * cp::tails::conditional_mean(zh));
      base = std::max(base, logs[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += cw[i] * std::exp(logs[i] - base);
    return base + std::log(sum);
  }

  double log_density(double x) const {
    double base = -1e300;
    std::vector<double> logs(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double zh = (x - (m1 * y[i] - m2)) / s;
      logs[i] = -0.5 * zh * zh - 0.5 * kLog2Pi - std::log(s);
      base = std::max(base, logs[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += cw[i] * std::exp(logs[i] - base);
    return base + std::log(sum);
  }

  // signed slope sum: d/dx of the density at x, scaled by exp(-base_out)
  double density_slope(double x, double base, double eps_sigma2) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double mu = m1 * y[i] - m2;
      const double zh = (x - mu) / s;
      const double lg = -0.5 * zh * zh - 0.5 * kLog2Pi - std::log(s);
      sum += cw[i] * ((mu - x) / eps_sigma2) * std::exp(lg - base);
    }
    return sum;
  }
};

}  // namespace

MassIntegrals mass_integrals(const RateHistory& A, double eps,
                             const GridDensity& init, double T) {
  init.validate();
  if (eps <= 0.0) throw std::invalid_argument("mass_integrals: eps must be > 0");
  const auto w = simpson_weights(init.grid);
  MassIntegrals out;
  if (T <= A.t_front()) {
    A.lambda(T);  // range check
    for (std::size_t i = 0; i < init.grid.size(); ++i) {
      out.mass += w[i] * init.values[i];
      out.first_moment += w[i] * init.grid[i] * init.values[i];
    }
    return out;
  }
  const auto m = kernels::moments(A, A.t_front(), T);
  const double s = std::sqrt(eps * m.sigma2);
  for (std::size_t i = 0; i < init.grid.size(); ++i) {
    const double mu = m.m1 * init.grid[i] - m.m2;
    const double zh = -mu / s;
    const double q = normal_upper_tail(zh);
    out.mass += w[i] * init.values[i] * q;
    out.first_moment += w[i] * init.values[i] * (mu * q + s * normal_pdf(zh));
  }
  return out;
}

Evolver::Evolver(GridDensity init, double eps, Options opt)
    : eps_(eps), opt_(opt) {
  init.validate();
  if (eps <= 0.0) throw std::invalid_argument("wholeline::Evolver: eps must be > 0");
  if (!(init.grid.front() >= 0.0)) {
    throw std::invalid_argument("wholeline::Evolver: support must be on x >= 0");
  }
  y_ = init.grid;
  const auto w = simpson_weights(y_);
  cw_.resize(y_.size());
  double i0 = 0.0, j0 = 0.0;
  for (std::size_t i = 0; i < y_.size(); ++i) {
    cw_[i] = w[i] * init.values[i];
    i0 += cw_[i];
    j0 += cw_[i] * y_[i];
  }
  if (!(i0 > 0.0) || !(j0 > 0.0)) {
    throw std::invalid_argument("wholeline::Evolver: initial data has no mass");
  }
  history_.extend(0.0, j0 / i0);
  traj_.columns = {"t",  "Lambda", "dLambda_dt",  "ks_exp",      "beta_sup_dev",
                   "A",  "m1",     "m2_over_m1",  "s2_over_m2",  "s2_over_m1sq"};
  next_sample_ = 0.0;
  record_row();
}

double Evolver::m1() const { return std::exp(e_int_); }
double Evolver::m2() const { return std::exp(e_int_) * p1_; }
double Evolver::sigma2() const { return std::exp(2.0 * e_int_) * p2_; }

void Evolver::step(double dt) {
  const double t = history_.t_back();
  const double lam = history_.lambda_back();
  const double t_new = t + dt;

  // slope predictor from the last accepted segment
  double lam_new = lam;
  const auto& ts = history_.times();
  const auto& ls = history_.lambdas();
  if (ts.size() >= 2) {
    const std::size_t n = ts.size();
    lam_new = lam + dt * (ls[n - 1] - ls[n - 2]) / (ts[n - 1] - ts[n - 2]);
  }

  bool converged = false;
  double de = 0.0, dp1 = 0.0, dp2 = 0.0;
  for (int it = 0; it < opt_.max_fixed_point; ++it) {
    de = RateHistory::segment_inv_integral(t, lam, t_new, lam_new, t, t_new);
    const double e0 = e_int_;
    dp1 = integrate(
        [&](double u) {
          return std::exp(-e0 - RateHistory::segment_inv_integral(t, lam, t_new,
                                                                  lam_new, t, u));
        },
        t, t_new, 1e-12);
    dp2 = integrate(
        [&](double u) {
          return std::exp(-2.0 * (e0 + RateHistory::segment_inv_integral(
                                            t, lam, t_new, lam_new, t, u)));
        },
        t, t_new, 1e-12);
    const double m1v = std::exp(e_int_ + de);
    const double m2v = m1v * (p1_ + dp1);
    const double s = std::sqrt(eps_ * m1v * m1v * (p2_ + dp2));
    const Mixture mix{y_, cw_, m1v, m2v, s};
    const double cand = std::exp(mix.log_excess(0.0) - mix.log_tail(0.0));
    const double rel = std::fabs(cand - lam_new) / lam_new;
    const double damp = (it < 10) ? 1.0 : 0.5;
    lam_new += damp * (cand - lam_new);
    if (rel < opt_.fp_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw std::runtime_error("wholeline::Evolver: fixed point did not converge");
  }
  e_int_ += de;
  p1_ += dp1;
  p2_ += dp2;
  residual_ = 0.0;
  const double lam_prev = history_.lambda_back();
  if (lam_new < lam_prev) {
    // strict increase holds up to solver tolerance; beyond it is a failure
    if (lam_prev - lam_new > 100.0 * opt_.fp_tol * lam_prev) {
      throw std::runtime_error("wholeline::Evolver: Lambda failed to increase");
    }
    lam_new = lam_prev;
  }
  history_.extend(t_new, lam_new);
}

void Evolver::advance_to(double t_end) {
  while (history_.t_back() < t_end - 1e-12 * (1.0 + t_end)) {
    const double dt = std::min(
        {std::max(opt_.dt0, opt_.dt_over_lambda * history_.lambda_back()),
         opt_.dt_max, t_end - history_.t_back()});
    step(dt);
    if (history_.t_back() >= next_sample_ - 1e-12) record_row();
  }
  traj_.history = history_;
}

void Evolver::record_row() {
  const double t = history_.t_back();
  next_sample_ = std::max(t + opt_.sample_min, t * opt_.sample_factor);
  const double lam = history_.lambda_back();
  const double rate = (t > 0.0) ? coarsening_rate() : 0.0;
  const double ks = (t > 0.0) ? ks_exponential() : 1.0;
  const double bdev = (t > 0.0) ? beta_sup_deviation() : 0.0;
  const double m1v = m1();
  traj_.rows.push_back({t, lam, rate, ks, bdev, 1.0 / lam, m1v, p1_,
                        m1v * p2_ / std::max(p1_, 1e-300), p2_});
}

Trajectory Evolver::take_trajectory() {
  traj_.history = history_;
  return traj_;
}

double Evolver::coarsening_rate() const {
  const double s2 = sigma2();
  if (!(s2 > 0.0)) throw std::domain_error("coarsening_rate: degenerate state");
  const double s = std::sqrt(eps_ * s2);
  const Mixture mix{y_, cw_, m1(), m2(), s};
  const double log_i = mix.log_tail(0.0);
  const double log_c0 = mix.log_density(0.0);
  const double r_c = std::exp(log_c0 - log_i);
  const double slope_scaled = mix.density_slope(0.0, log_c0, eps_ * s2);
  const double r_cx = slope_scaled * std::exp(log_c0 - log_i);
  const double lam = history_.lambda_back();
  return lam * (r_c + 0.5 * eps_ * (r_cx + r_c / lam));
}

double Evolver::ks_exponential() const {
  const double lam = history_.lambda_back();
  const double s = std::sqrt(eps_ * sigma2());
  const Mixture mix{y_, cw_, m1(), m2(), s};
  const double log_i = mix.log_tail(0.0);
  double sup = 0.0;
  for (int k = 0; k <= 600; ++k) {
    const double u = 14.0 * k / 600.0;
    const double surv = std::exp(mix.log_tail(u * lam) - log_i);
    sup = std::max(sup, std::fabs(surv - std::exp(-u)));
  }
  return sup;
}

double Evolver::beta_sup_deviation(double window_mult) const {
  const double lam = history_.lambda_back();
  const double s = std::sqrt(eps_ * sigma2());
  const Mixture mix{y_, cw_, m1(), m2(), s};
  const double log_mass = mix.log_tail(0.0);
  double sup = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double x = window_mult * lam * k / 400.0;
    const double lw = mix.log_tail(x);
    if (lw - log_mass < std::log(TailProfile::kWeightGuard)) break;
    const double b =
        std::exp(mix.log_density(x) + mix.log_excess(x) - 2.0 * lw);
    sup = std::max(sup, std::fabs(b - 1.0));
  }
  return sup;
}

double Evolver::fixed_point_residual() const {
  const double s = std::sqrt(eps_ * sigma2());
  const Mixture mix{y_, cw_, m1(), m2(), s};
  const double lam = std::exp(mix.log_excess(0.0) - mix.log_tail(0.0));
  return std::fabs(lam - history_.lambda_back()) / lam;
}

double Evolver::log_tail_at(double x) const {
  const Mixture mix{y_, cw_, m1(), m2(), std::sqrt(eps_ * sigma2())};
  return mix.log_tail(x);
}

double Evolver::log_density_at(double x) const {
  const Mixture mix{y_, cw_, m1(), m2(), std::sqrt(eps_ * sigma2())};
  return mix.log_density(x);
}

double Evolver::log_excess_at(double x) const {
  const Mixture mix{y_, cw_, m1(), m2(), std::sqrt(eps_ * sigma2())};
  return mix.log_excess(x);
}

double Evolver::beta_at(double x) const {
  const Mixture mix{y_, cw_, m1(), m2(), std::sqrt(eps_ * sigma2())};
  return std::exp(mix.log_density(x) + mix.log_excess(x) - 2.0 * mix.log_tail(x));
}

double coarsening_rate(const RateHistory& A, double eps, const GridDensity& init,
                       double T) {
  init.validate();
  const auto m = kernels::moments(A, A.t_front(), T);
  if (!(m.sigma2 > 0.0)) throw std::domain_error("coarsening_rate: T at start");
  const auto w = simpson_weights(init.grid);
  std::vector<double> cw(init.grid.size());
  for (std::size_t i = 0; i < cw.size(); ++i) cw[i] = w[i] * init.values[i];
  const double s = std::sqrt(eps * m.sigma2);
  const Mixture mix{init.grid, cw, m.m1, m.m2, s};
  const double log_i = mix.log_tail(0.0);
  const double log_c0 = mix.log_density(0.0);
  const double r_c = std::exp(log_c0 - log_i);
  const double r_cx = mix.density_slope(0.0, log_c0, eps * m.sigma2) *
                      std::exp(log_c0 - log_i);
  const double lam = A.lambda(T);
  return lam * (r_c + 0.5 * eps * (r_cx + r_c / lam));
}

ConditionReport asymptotic_conditions(const Trajectory& traj) {
  if (traj.rows.size() < 8) {
    throw std::invalid_argument("asymptotic_conditions: trajectory too short");
  }
  const auto lam = traj.column("Lambda");
  if (!(lam.back() >= 10.0 * lam.front())) {
    throw std::invalid_argument(
        "asymptotic_conditions: need at least tenfold coarsening");
  }
  const auto a = traj.column("A");
  const auto m1 = traj.column("m1");
  const auto alpha = traj.column("m2_over_m1");
  const auto s2m2 = traj.column("s2_over_m2");
  const auto s2m1 = traj.column("s2_over_m1sq");
  const auto ts = traj.column("t");

  auto monotone = [](const std::vector<double>& v, int sign) {
    for (std::size_t i = 2; i < v.size(); ++i) {  // skip the t = 0 row
      if (sign * (v[i] - v[i - 1]) < -1e-9 * std::fabs(v[i])) return false;
    }
    return true;
  };

  ConditionReport r;
  r.a_decreasing = monotone(a, -1) && a.back() < 0.5 * a[1];
  r.m1_growing = monotone(m1, +1) && m1.back() > 10.0;
  r.alpha_growing = monotone(alpha, +1) && alpha.back() > 3.0 * alpha[1];
  r.s2_over_m2_growing = monotone(s2m2, +1) && s2m2.back() > 3.0 * s2m2[1];

  // bounded: still monotone up, but the relative change over the last decade
  // of time is small compared to the total
  double v_decade = s2m1.back();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] >= 0.1 * ts.back()) {
      v_decade = s2m1[i];
      break;
    }
  }
  r.plateau_rel_change = (s2m1.back() - v_decade) / s2m1.back();
  r.s2_over_m1sq_bounded = monotone(s2m1, +1) && r.plateau_rel_change < 0.5;

  r.a_first = a[1];
  r.a_last = a.back();
  r.m1_last = m1.back();
  r.alpha_last = alpha.back();
  r.s2_over_m2_last = s2m2.back();
  r.s2_over_m1sq_last = s2m1.back();
  return r;
}

std::vector<LogRateRow> log_rate_report(const Trajectory& traj, double eps) {
  std::vector<LogRateRow> out;
  const auto ts = traj.column("t");
  const auto lam = traj.column("Lambda");
  const auto m1 = traj.column("m1");
  const auto alpha = traj.column("m2_over_m1");
  const auto p2 = traj.column("s2_over_m1sq");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    LogRateRow r;
    r.t = ts[i];
    const double m2 = m1[i] * alpha[i];
    const double s2 = m1[i] * m1[i] * p2[i];
    r.balance_ratio = (s2 > 0.0) ? lam[i] * m2 / (eps * s2) : 0.0;
    if (std::log(std::max(ts[i], 1e-300)) > 1.0) {
      r.masked = false;
      r.deviation = lam[i] / ts[i] - (1.0 - 0.5 / std::log(ts[i]));
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace cp::wholeline
