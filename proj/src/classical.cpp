#include "cplab/classical.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "cplab/kernels.hpp"
#include "cplab/quadrature.hpp"

namespace cp::classical {

namespace {
constexpr double kTailFloor = 1e-12;  // relative mass floor before underflow
}

double transport_map(const RateHistory& A, double x, double t) {
  const auto m = kernels::moments(A, A.t_front(), t);
  return (x + m.m2) / m.m1;
}

Evolver::Evolver(const GridDensity& init, Options opt) : opt_(opt) {
  init.validate();
  const auto p = measures::tail_functions(init);
  auto w = std::make_shared<PiecewiseLinear>(p.x, p.w);
  auto h = std::make_shared<PiecewiseLinear>(p.x, p.h);
  auto c = std::make_shared<PiecewiseLinear>(init.grid, init.values);
  const double end = init.grid.back();
  w0_ = [w, end](double u) { return u >= end ? 0.0 : (*w)(u); };
  h0_ = [h, end](double u) { return u >= end ? 0.0 : (*h)(u); };
  c0_ = [c, end](double u) { return u >= end ? 0.0 : (*c)(u); };
  support_end_ = end;
  init_common();
}

Evolver::Evolver(const SelfSimilarFamily& family, Options opt) : opt_(opt) {
  const SelfSimilarFamily f = family;
  w0_ = [f](double u) { return f.survival(u); };
  h0_ = [f](double u) { return f.tail_integral(u); };
  c0_ = [f](double u) { return f.density(u); };
  support_end_ = f.support_end();
  init_common();
}

void Evolver::init_common() {
  const double w0 = w0_(0.0);
  const double h0 = h0_(0.0);
  if (!(w0 > 0.0) || !(h0 > 0.0)) {
    throw std::invalid_argument("classical::Evolver: initial law has no mass");
  }
  history_.extend(0.0, h0 / w0);
  dt_ = (opt_.dt > 0.0) ? opt_.dt : 1e-3 * history_.lambda_back();
  if (opt_.sample_interval <= 0.0) opt_.sample_interval = 25.0 * dt_;
  traj_.columns = {"t", "Lambda", "dLambda_dt", "beta_at_0", "ks_exp"};
  traj_.history = history_;
  next_sample_ = 0.0;
  record_row();
}

double Evolver::lambda_candidate(double alpha, double m1) const {
  const double w = w0_(alpha);
  if (!(w > kTailFloor * w0_(0.0))) {
    throw std::runtime_error("classical::Evolver: tail mass underflow");
  }
  return m1 * h0_(alpha) / w;
}

void Evolver::step(double dt) {
  const double t = history_.t_back();
  const double lam = history_.lambda_back();
  for (int attempt = 0;; ++attempt) {
    const double t_new = t + dt;
    // predictor: linear extrapolation of Lambda along the current rate
    double lam_new = lam + dt * coarsening_rate();
    bool converged = false;
    double con_exp = 0.0, con_alpha = 0.0;
    for (int it = 0; it < opt_.max_fixed_point; ++it) {
      const double de = RateHistory::segment_inv_integral(t, lam, t_new, lam_new,
                                                          t, t_new);
      const double e0 = exp_int_;
      const double da = integrate(
          [&](double u) {
            return std::exp(-e0 - RateHistory::segment_inv_integral(
                                      t, lam, t_new, lam_new, t, u));
          },
          t, t_new, 1e-12);
      const double cand =
          lambda_candidate(alpha_ + da, std::exp(exp_int_ + de));
      const double rel = std::fabs(cand - lam_new) / lam_new;
      const double damp = (it < 8) ? 1.0 : 0.5;
      lam_new += damp * (cand - lam_new);
      if (rel < opt_.fp_tol) {
        converged = true;
        con_exp = de;
        con_alpha = da;
        residual_ = rel;
        break;
      }
    }
    if (converged) {
      exp_int_ += con_exp;
      alpha_ += con_alpha;
      history_.extend(t_new, lam_new);
      return;
    }
    if (attempt >= opt_.max_halvings) {
      throw std::runtime_error("classical::Evolver: fixed point did not converge");
    }
    dt *= 0.5;
  }
}

void Evolver::advance_to(double t_end) {
  while (history_.t_back() < t_end - 1e-14 * (1.0 + t_end)) {
    step(std::min(dt_, t_end - history_.t_back()));
    if (history_.t_back() >= next_sample_ - 1e-12) record_row();
  }
  traj_.history = history_;
}

void Evolver::record_row() {
  next_sample_ = history_.t_back() + opt_.sample_interval;
  const double rate = coarsening_rate();
  traj_.rows.push_back(
      {history_.t_back(), history_.lambda_back(), rate, rate, ks_exponential()});
  if (opt_.record_snapshots) {
    const double lam = history_.lambda_back();
    traj_.snapshots.emplace_back(
        history_.t_back(), snapshot(uniform_grid(0.0, 12.0 * lam, 1201)));
  }
}

Trajectory Evolver::take_trajectory() {
  traj_.history = history_;
  return traj_;
}

double Evolver::coarsening_rate() const {
  const double w = w0_(alpha_);
  if (!(w > kTailFloor * w0_(0.0))) {
    throw std::runtime_error("classical::Evolver: tail exhausted");
  }
  return c0_(alpha_) * h0_(alpha_) / (w * w);
}

double Evolver::tail_at(double x) const {
  const double m1 = std::exp(exp_int_);
  return w0_(x / m1 + alpha_);
}

double Evolver::beta_at(double x) const {
  const double m1 = std::exp(exp_int_);
  const double u = x / m1 + alpha_;
  const double w = w0_(u);
  if (!(w > kTailFloor * w0_(0.0))) {
    throw std::runtime_error("classical::Evolver: tail exhausted at x");
  }
  return c0_(u) * h0_(u) / (w * w);
}

double Evolver::ks_exponential() const {
  const double lam = history_.lambda_back();
  const double w_at_0 = tail_at(0.0);
  double sup = 0.0;
  for (int i = 0; i <= 1200; ++i) {
    const double u = 12.0 * i / 1200.0;
    sup = std::max(sup,
                   std::fabs(tail_at(u * lam) / w_at_0 - std::exp(-u)));
  }
  return sup;
}

GridDensity Evolver::snapshot(const std::vector<double>& grid) const {
  const double m1 = std::exp(exp_int_);
  GridDensity d;
  d.grid = grid;
  d.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    d.values[i] = c0_(grid[i] / m1 + alpha_) / m1;
  }
  d.truncation_mass = w0_(grid.back() / m1 + alpha_);
  d.truncation_tail = m1 * h0_(grid.back() / m1 + alpha_);
  return d;
}

double Evolver::self_consistency_residual() const {
  const double lam = history_.lambda_back();
  return std::fabs(lam - std::exp(exp_int_) * h0_(alpha_) / w0_(alpha_)) / lam;
}

Trajectory evolve(const GridDensity& init, double t_end, double dt) {
  Options opt;
  opt.dt = dt;
  Evolver e(init, opt);
  e.advance_to(t_end);
  return e.take_trajectory();
}

Trajectory evolve(const SelfSimilarFamily& family, double t_end, double dt) {
  Options opt;
  opt.dt = dt;
  Evolver e(family, opt);
  e.advance_to(t_end);
  return e.take_trajectory();
}

}  // namespace cp::classical
