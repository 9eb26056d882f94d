#include "cplab/halfline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cplab/exitcost.hpp"
#include "cplab/kernels.hpp"
#include "cplab/measures.hpp"
#include "cplab/normal.hpp"
#include "cplab/quadrature.hpp"

namespace cp::halfline {

namespace {

double trapz(const std::vector<double>& x, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    s += 0.5 * (x[i + 1] - x[i]) * (c[i] + c[i + 1]);
  }
  return s;
}

double trapz_moment(const std::vector<double>& x, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    s += 0.5 * (x[i + 1] - x[i]) * (x[i] * c[i] + x[i + 1] * c[i + 1]);
  }
  return s;
}

GridSpec fill_defaults(GridSpec g, double eps) {
  if (g.layer_spacing <= 0.0) g.layer_spacing = eps / 15.0;
  if (g.layer_width <= 0.0) g.layer_width = 8.0 * eps;
  return g;
}

double wall_gradient(const std::vector<double>& x, const std::vector<double>& c) {
  // quadratic through (0,0), (x1,c1), (x2,c2)
  const double x1 = x[1], x2 = x[2];
  return (c[1] * x2 * x2 - c[2] * x1 * x1) / (x1 * x2 * (x2 - x1));
}

}  // namespace

Evolver::Evolver(const GridDensity& init, double eps, GridSpec gspec,
                 Options opt)
    : eps_(eps), gspec_(fill_defaults(gspec, eps)), opt_(opt), work_(16) {
  init.validate();
  if (eps <= 0.0) throw std::invalid_argument("halfline::Evolver: eps must be > 0");
  if (init.values.front() != 0.0) {
    throw std::invalid_argument("halfline::Evolver: init must vanish at x = 0");
  }
  const double mean0 =
      trapz_moment(init.grid, init.values) / trapz(init.grid, init.values);
  double x_max = gspec_.x_max;
  if (x_max <= 0.0) {
    x_max = init.grid.back() + std::max({12.0 * mean0, 20.0 * eps, 1.0});
  }
  grid_ = Grid::build(gspec_.layer_spacing, gspec_.layer_width, gspec_.growth,
                      std::max(gspec_.cap_fraction * mean0, gspec_.layer_spacing),
                      x_max);

  const PiecewiseLinear f(init.grid, init.values);
  c_.assign(grid_.size(), 0.0);
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    const double x = grid_.x[i];
    c_[i] = (x <= init.grid.back()) ? std::max(f(x), 0.0) : 0.0;
  }
  const double j = trapz_moment(grid_.x, c_);
  if (!(j > 0.0)) {
    throw std::invalid_argument("halfline::Evolver: init has no first moment");
  }
  for (double& v : c_) v /= j;
  j0_ = trapz_moment(grid_.x, c_);

  drift_history_.extend(0.0, lambda());
  traj_.columns = {"t",           "Lambda",        "dLambda_dt",
                   "ks_exp",      "beta_sup_dev",  "A",
                   "m1",          "m2_over_m1",    "s2_over_m2",
                   "s2_over_m1sq","beta_at_0",     "boundary_flux",
                   "beta_max"};
  next_sample_ = 0.0;
  record_row();
}

double Evolver::lambda() const {
  return trapz_moment(grid_.x, c_) / trapz(grid_.x, c_);
}

double Evolver::mass_error() const {
  return std::fabs(trapz_moment(grid_.x, c_) - j0_) / j0_;
}

void Evolver::maybe_extend_grid() {
  const std::size_t n = grid_.size();
  double tail = 0.0;
  for (std::size_t i = n - 10; i + 1 < n; ++i) {
    tail += 0.5 * (grid_.x[i + 1] - grid_.x[i]) *
            (grid_.x[i] * c_[i] + grid_.x[i + 1] * c_[i + 1]);
  }
  if (tail > gspec_.tail_mass_tol * j0_) {
    const double lam = drift_history_.lambda_back();
    grid_.extend(grid_.x_max() * 1.25 + 4.0 * lam,
                 std::max(gspec_.cap_fraction * lam, gspec_.layer_spacing),
                 gspec_.growth);
    c_.resize(grid_.size(), 0.0);
  }
}

void Evolver::step(double dt) {
  const double t = drift_history_.t_back();
  double theta = opt_.theta;
  if (steps_ < opt_.rannacher_steps) theta = 1.0;  // smooth the startup

  // predictor from the last accepted slope
  const auto& ts = drift_history_.times();
  const auto& ls = drift_history_.lambdas();
  double lam = ls.back();
  if (ts.size() >= 2) {
    const std::size_t n = ts.size();
    lam += dt * (ls[n - 1] - ls[n - 2]) / (ts[n - 1] - ts[n - 2]);
  }

  // secant on the drift parameter so the discrete first moment is conserved
  std::vector<double> c_new;
  auto drift_residual = [&](double lam_try) {
    auto v = [lam_try](double x) { return 1.0 - x / lam_try; };
    work_.step(grid_.x, c_, dt, theta, eps_, v, 0.0, c_new);
    return work_.first_moment_drift(grid_.x);
  };
  double a = lam;
  double ga = drift_residual(a);
  double b = lam * (1.0 + 1e-4);
  double gb = drift_residual(b);
  int it = 0;
  while (std::fabs(gb) * dt > opt_.fp_tol * j0_ && it < opt_.max_fixed_point) {
    if (gb == ga) break;
    const double c = b - gb * (b - a) / (gb - ga);
    a = b;
    ga = gb;
    b = (c > 0.1 * b) ? c : 0.5 * b;  // keep the parameter positive
    gb = drift_residual(b);
    ++it;
  }
  if (!(std::fabs(gb) * dt <= 100.0 * opt_.fp_tol * j0_)) {
    throw std::runtime_error("halfline::Evolver: drift fixed point stalled");
  }

  // accept
  c_.swap(c_new);
  last_wall_flux_ = work_.wall_flux();
  ++steps_;

  double cmin = 0.0, cmax = 0.0;
  for (double v : c_) {
    cmin = std::min(cmin, v);
    cmax = std::max(cmax, v);
  }
  if (cmin < -opt_.negativity_tol * cmax) {
    throw std::runtime_error("halfline::Evolver: negative density beyond tolerance");
  }
  if (mass_error() > opt_.mass_tol) {
    throw std::runtime_error("halfline::Evolver: conservation defect beyond bound");
  }

  // extend the drift history and its kernel-moment accumulators
  const double t_new = t + dt;
  const double lam_prev = drift_history_.lambda_back();
  double lam_acc = b;
  if (lam_acc < lam_prev) {
    if (lam_prev - lam_acc > 1e-8 * lam_prev) {
      throw std::runtime_error("halfline::Evolver: Lambda failed to increase");
    }
    lam_acc = lam_prev;
  }
  const double de = RateHistory::segment_inv_integral(t, lam_prev, t_new, lam_acc,
                                                      t, t_new);
  const double e0 = e_int_;
  p1_ += integrate(
      [&](double u) {
        return std::exp(-e0 - RateHistory::segment_inv_integral(
                                  t, lam_prev, t_new, lam_acc, t, u));
      },
      t, t_new, 1e-12);
  p2_ += integrate(
      [&](double u) {
        return std::exp(-2.0 * (e0 + RateHistory::segment_inv_integral(
                                          t, lam_prev, t_new, lam_acc, t, u)));
      },
      t, t_new, 1e-12);
  e_int_ += de;
  drift_history_.extend(t_new, lam_acc);

  maybe_extend_grid();
}

void Evolver::advance_to(double t_end) {
  while (drift_history_.t_back() < t_end - 1e-12 * (1.0 + t_end)) {
    const double lam = drift_history_.lambda_back();
    const double dt =
        std::min({std::max(opt_.dt0, opt_.dt_over_lambda * lam), opt_.dt_max,
                  t_end - drift_history_.t_back()});
    step(dt);
    if (drift_history_.t_back() >= next_sample_ - 1e-12) record_row();
  }
  traj_.history = drift_history_;
}

double Evolver::coarsening_rate() const {
  // the wall-gradient formula evaluated through the scheme's own boundary
  // flux: in the quasi-steady layer H(0) = (eps/2) dc/dx(0) and the face
  // flux is its exact discrete counterpart (the fit-based gradient carries
  // an O((h/eps)^2) layer bias)
  const double i = trapz(grid_.x, c_);
  return last_wall_flux_ / (i * i);
}

double Evolver::wall_gradient_rate() const {
  const double i = trapz(grid_.x, c_);
  return 0.5 * eps_ * wall_gradient(grid_.x, c_) / (i * i);
}

GridDensity Evolver::state() const {
  GridDensity d;
  d.grid = grid_.x;
  d.values = c_;
  for (double& v : d.values) v = std::max(v, 0.0);  // shave solver noise
  return d;
}

std::vector<double> Evolver::beta_profile(std::vector<double>* wout) const {
  const auto p = measures::tail_functions(state());
  if (wout) *wout = p.w;
  return p.beta;
}

double Evolver::ks_exponential() const {
  const auto p = measures::tail_functions(state());
  const double mass = p.w.front();
  const double mu = p.h.front() / mass;
  const PiecewiseLinear w(p.x, p.w);
  double sup = 0.0;
  for (int k = 0; k <= 700; ++k) {
    const double u = 14.0 * k / 700.0;
    const double x = u * mu;
    const double surv = (x <= p.x.back()) ? w(x) / mass : 0.0;
    sup = std::max(sup, std::fabs(surv - std::exp(-u)));
  }
  return sup;
}

double Evolver::beta_at0() const {
  // Dirichlet pins the density, and with it beta, to zero at the wall
  const auto p = measures::tail_functions(state());
  return p.beta.front();
}

double Evolver::beta_window_deviation(double window_from) const {
  std::vector<double> w;
  const auto beta = beta_profile(&w);
  // resolvable range for FD data ends near the solver noise floor, well
  // before the exact-quadrature guard of the measures module
  const double guard = 1e-8 * w.front();
  double sup = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (grid_.x[i] <= window_from) continue;
    if (!(w[i] > guard) || std::isnan(beta[i])) break;
    sup = std::max(sup, std::fabs(beta[i] - 1.0));
    any = true;
  }
  if (!any) throw std::domain_error("beta_window_deviation: empty window");
  return sup;
}

double Evolver::beta_max() const {
  std::vector<double> w;
  const auto beta = beta_profile(&w);
  const double guard = 1e-8 * w.front();
  double sup = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (!(w[i] > guard) || std::isnan(beta[i])) break;
    sup = std::max(sup, beta[i]);
  }
  return sup;
}

void Evolver::record_row() {
  const double t = drift_history_.t_back();
  next_sample_ = std::max(t + opt_.sample_min, t * opt_.sample_factor);
  const double lam = lambda();
  const double m1v = std::exp(e_int_);
  const double rate = (t > 0.0) ? coarsening_rate() : 0.0;
  const double ks = ks_exponential();
  const double bdev = (t > 0.0) ? beta_window_deviation(lam / 4.0) : 1.0;
  traj_.rows.push_back({t, lam, rate, ks, bdev, 1.0 / lam, m1v, p1_,
                        m1v * p2_ / std::max(p1_, 1e-300), p2_, beta_at0(),
                        last_wall_flux_, beta_max()});
}

Trajectory Evolver::take_trajectory() {
  traj_.history = drift_history_;
  return traj_;
}

GridDensity dirichlet_green(const RateHistory& drift_history, double eps,
                            double y, double T, GridSpec gspec,
                            double mollify_cells, double dt_scale) {
  if (!(y > 0.0)) throw std::invalid_argument("dirichlet_green: y must be > 0");
  if (!(T > drift_history.t_front()) || T > drift_history.t_back()) {
    throw std::invalid_argument("dirichlet_green: T outside the history");
  }
  gspec = fill_defaults(gspec, eps);
  const double lam_T = drift_history.lambda(T);
  double x_max = gspec.x_max;
  if (x_max <= 0.0) x_max = std::max(4.0 * y, 6.0 * lam_T + y);
  Grid grid = Grid::build(gspec.layer_spacing, gspec.layer_width, gspec.growth,
                          std::max(gspec.cap_fraction * lam_T, gspec.layer_spacing),
                          x_max);

  // local spacing at the source sets the mollifier width
  std::size_t iy = 0;
  while (iy + 1 < grid.size() && grid.x[iy + 1] < y) ++iy;
  if (iy + 2 >= grid.size()) {
    throw std::invalid_argument("dirichlet_green: y too close to the far end");
  }
  const double h_local = grid.x[iy + 1] - grid.x[iy];
  const double width = mollify_cells * h_local;
  if (y < 3.0 * width) {
    throw std::invalid_argument("dirichlet_green: y within the mollifier of 0");
  }

  std::vector<double> c(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    c[i] = normal_pdf((grid.x[i] - y) / width) / width;
  }
  const double mass = trapz(grid.x, c);
  for (double& v : c) v /= mass;

  StepWorkspace work(grid.size());
  std::vector<double> c_new;
  double t = drift_history.t_front();
  long k = 0;
  Options opt;  // reuse the default stepping policy
  while (t < T - 1e-12 * (1.0 + T)) {
    const double lam_t = drift_history.lambda(t);
    double dt = std::min({std::max(opt.dt0, dt_scale * opt.dt_over_lambda * lam_t),
                          opt.dt_max * dt_scale, T - t});
    double theta = opt.theta;
    if (k < opt.rannacher_steps) {
      theta = 1.0;
      dt = std::min(dt, 0.5 * std::max(opt.dt0, width * width / eps));
    }
    const double lam_mid = drift_history.lambda(std::min(t + 0.5 * dt, T));
    auto v = [lam_mid](double x) { return 1.0 - x / lam_mid; };
    work.step(grid.x, c, dt, theta, eps, v, 0.0, c_new);
    c.swap(c_new);
    t += dt;
    ++k;
  }

  GridDensity out;
  out.grid = grid.x;
  out.values = c;
  for (double& v : out.values) v = std::max(v, 0.0);
  return out;
}

std::vector<double> whole_line_green_mollified(const RateHistory& history,
                                               double eps, double y, double T,
                                               double mollify_width,
                                               const std::vector<double>& x) {
  const auto m = kernels::moments(history, history.t_front(), T);
  const double var =
      eps * m.sigma2 + m.m1 * m.m1 * mollify_width * mollify_width;
  const double sd = std::sqrt(var);
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    g[i] = normal_pdf((x[i] + m.m2 - m.m1 * y) / sd) / sd;
  }
  return g;
}

ExitCostCurve exit_ratio(const std::vector<double>& x,
                         const std::vector<double>& g_dirichlet,
                         const std::vector<double>& g_free, double eps,
                         double y, double T) {
  if (x.size() != g_dirichlet.size() || x.size() != g_free.size()) {
    throw std::invalid_argument("exit_ratio: size mismatch");
  }
  ExitCostCurve out;
  out.y = y;
  out.T = T;
  out.eps = eps;
  out.masked_from = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(g_free[i] > 1e-280)) {
      out.masked_from = i;
      break;
    }
    const double k =
        std::clamp(g_dirichlet[i] / g_free[i], 0.0, 1.0 - 1e-15);
    out.x.push_back(x[i]);
    out.K.push_back(k);
    out.q.push_back(-eps * std::log1p(-k));
  }
  return out;
}

QLimitReport q_limit_check(const Trajectory& traj, double eps, double y,
                           const std::vector<double>& x_window,
                           const std::vector<double>& horizons,
                           GridSpec gspec) {
  QLimitReport rep;
  const RateHistory& hist = traj.history;

  // doubling property of the scale along the run
  double min_ratio = 1e300;
  const double t_end = hist.t_back();
  for (int k = 0; k <= 200; ++k) {
    const double t = hist.t_front() + (t_end - hist.t_front()) * k / 200.0;
    const double lam = hist.lambda(t);
    if (t + lam > t_end) break;
    min_ratio = std::min(min_ratio, hist.lambda(t + lam) / lam);
  }
  rep.doubling_delta = min_ratio - 1.0;
  rep.doubling_ok = min_ratio < 1e299 && rep.doubling_delta > 0.0;

  // the cost itself comes from the dual boundary-value problem: the direct
  // kernel ratio saturates once K approaches one, far below the window of
  // interest at desk-scale eps
  const kernels::MomentTable table(hist);
  const double x_hi = *std::max_element(x_window.begin(), x_window.end());
  for (double T : horizons) {
    auto lam_field = [&](double xv, double t) { return table.drift(xv, y, t); };
    const double t0 = std::max(1e-3, 1e-4 * T);
    const auto dual = exitcost::dual_cost_solve(
        lam_field, eps, t0, T, x_hi * 1.5 + 2.0, [](double) { return 0.0; });
    const PiecewiseLinear q(dual.x, dual.q);

    const auto m = kernels::moments(hist, hist.t_front(), T);
    const double lower_slope = m.m1 * y / m.sigma2;  // lower envelope / 2x
    const double upper_slope = -kernels::drift(hist, 0.0, y, T);

    QLimitHorizon hz;
    hz.T = T;
    for (double xv : x_window) {
      if (xv > dual.x.back()) break;
      const double qv = q(xv);
      if (std::isnan(qv)) continue;
      hz.x.push_back(xv);
      hz.q_over_2x.push_back(qv / (2.0 * xv));
      hz.lower_over_2x.push_back(lower_slope);
      hz.upper_over_2x.push_back(upper_slope);
    }
    rep.horizons.push_back(std::move(hz));
  }
  return rep;
}

std::vector<double> survival_weight_profile(const RateHistory& drift_history,
                                            double eps,
                                            const std::vector<double>& ys,
                                            double T, GridSpec gspec) {
  if (!(T > drift_history.t_front()) || T > drift_history.t_back()) {
    throw std::invalid_argument("survival_weight: T outside the history");
  }
  gspec = fill_defaults(gspec, eps);
  const double lam_T = drift_history.lambda(T);
  double y_max = gspec.x_max;
  const double y_req = *std::max_element(ys.begin(), ys.end());
  if (y_max <= 0.0) y_max = std::max(4.0 * lam_T, 2.0 * y_req + 1.0);
  y_max = std::max(y_max, 1.5 * y_req);
  Grid grid = Grid::build(gspec.layer_spacing, gspec.layer_width, gspec.growth,
                          std::max(gspec.cap_fraction * lam_T, gspec.layer_spacing),
                          y_max);
  const std::size_t n = grid.size();

  std::vector<double> u(n, 1.0), u_new(n);
  u[0] = 0.0;

  // backward sweep in remaining time; fitted-operator discretization keeps
  // the scheme monotone at large drift Peclet numbers
  Options opt;
  double tau = 0.0;  // time remaining to T is tau; physical t = T - tau
  long k = 0;
  std::vector<double> lo(n), dg(n), up(n), rhs(n), tmp(n);
  while (tau < T - 1e-12 * (1.0 + T)) {
    const double t_here = T - tau;
    const double lam_t = drift_history.lambda(std::max(t_here - 1e-12, 0.0));
    double dtau = std::min({std::max(opt.dt0, opt.dt_over_lambda * lam_t),
                            opt.dt_max, T - tau});
    double theta = opt.theta;
    if (k < opt.rannacher_steps) {
      theta = 1.0;
      dtau = std::min(dtau, opt.dt0);
    }
    const double t_mid = std::clamp(T - (tau + 0.5 * dtau),
                                    drift_history.t_front(),
                                    drift_history.t_back());
    const double a_coef = 1.0 / drift_history.lambda(t_mid);

    auto assemble = [&](double th, double dt) {
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hm = grid.x[i] - grid.x[i - 1];
        const double hp = grid.x[i + 1] - grid.x[i];
        const double b = a_coef * grid.x[i] - 1.0;
        const double dcoef = 0.5 * eps;
        const double rho = b * 0.5 * (hm + hp) / (2.0 * dcoef);
        const double fitted =
            dcoef * ((std::fabs(rho) < 1e-4) ? 1.0 + rho * rho / 3.0
                                             : rho / std::tanh(rho));
        // quadratic-fit first and second derivatives on the nonuniform grid
        const double d1p = hm / (hp * (hm + hp));
        const double d1m = -hp / (hm * (hm + hp));
        const double d10 = (hp - hm) / (hp * hm);
        const double d2p = 2.0 / (hp * (hm + hp));
        const double d2m = 2.0 / (hm * (hm + hp));
        const double d20 = -2.0 / (hp * hm);
        const double cp = b * d1p + fitted * d2p;
        const double cm = b * d1m + fitted * d2m;
        const double c0 = b * d10 + fitted * d20;
        lo[i] = -th * dt * cm;
        dg[i] = 1.0 - th * dt * c0;
        up[i] = -th * dt * cp;
        rhs[i] = u[i] + (1.0 - th) * dt *
                            (cm * u[i - 1] + c0 * u[i] + cp * u[i + 1]);
      }
      rhs[1] -= lo[1] * 0.0;  // u(0) = 0
      rhs[n - 2] -= up[n - 2] * 1.0;  // far Dirichlet u = 1
    };
    assemble(theta, dtau);

    // Thomas on rows 1..n-2
    tmp[1] = up[1] / dg[1];
    rhs[1] = rhs[1] / dg[1];
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double m = dg[i] - lo[i] * tmp[i - 1];
      tmp[i] = up[i] / m;
      rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / m;
    }
    u_new[n - 2] = rhs[n - 2];
    for (std::size_t i = n - 2; i-- > 1;) {
      u_new[i] = rhs[i] - tmp[i] * u_new[i + 1];
    }
    u_new[0] = 0.0;
    u_new[n - 1] = 1.0;
    u.swap(u_new);
    tau += dtau;
    ++k;
  }

  const PiecewiseLinear ui(grid.x, u);
  std::vector<double> out;
  out.reserve(ys.size());
  for (double yv : ys) out.push_back(std::clamp(ui(yv), 0.0, 1.0));
  return out;
}

double survival_weight(const RateHistory& drift_history, double eps, double y,
                       double T, GridSpec gspec) {
  return survival_weight_profile(drift_history, eps, {y}, T, gspec).front();
}

BoundsReport coarsening_bounds_check(const Trajectory& traj, double t0) {
  BoundsReport rep;
  rep.t0 = t0;
  const auto ts = traj.column("t");
  const auto lam = traj.column("Lambda");
  const auto rate = traj.column("dLambda_dt");
  const auto bmax = traj.column("beta_max");
  if (ts.back() <= t0) {
    throw std::invalid_argument("coarsening_bounds_check: trajectory too short");
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < t0) continue;
    rep.beta_ceiling = std::max(rep.beta_ceiling, bmax[i]);
    rep.rate_ceiling = std::max(rep.rate_ceiling, rate[i]);
  }
  const PiecewiseLinear lam_of_t(ts, lam);
  double min_ratio = 1e300;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < t0) continue;
    const double target = ts[i] + lam[i];
    if (target > ts.back()) break;
    min_ratio = std::min(min_ratio, lam_of_t(target) / lam[i]);
  }
  if (min_ratio > 1e299) {
    throw std::invalid_argument(
        "coarsening_bounds_check: run too short to evaluate T + Lambda(T)");
  }
  rep.min_doubling_ratio = min_ratio;
  return rep;
}

}  // namespace cp::halfline
