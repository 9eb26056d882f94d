#include "cplab/exitcost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "cplab/kernels.hpp"
#include "cplab/normal.hpp"
#include "cplab/quadrature.hpp"

namespace cp::exitcost {

double const_drift_green(double k, double eps, double x, double xp, double t) {
  if (k <= 0.0 || eps <= 0.0 || t <= 0.0 || x < 0.0 || xp < 0.0) {
    throw std::invalid_argument("const_drift_green: arguments must be positive");
  }
  const double var = eps * t;
  const double z = (x - xp + k * t);
  const double gauss = std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * M_PI * var);
  return gauss * (-std::expm1(-2.0 * x * xp / var));
}

double exit_time_mass(double k, double eps, double x, double T) {
  if (k <= 0.0 || eps <= 0.0 || x <= 0.0) {
    throw std::invalid_argument("exit_time_mass: arguments must be positive");
  }
  if (std::isinf(T)) return std::exp(-2.0 * k * x / eps);
  auto f = [&](double t) {
    if (t <= 0.0) return 0.0;
    const double lg = std::log(x) - 1.5 * std::log(t) -
                      0.5 * std::log(2.0 * M_PI * eps) -
                      0.5 * (x + k * t) * (x + k * t) / (eps * t);
    return std::exp(lg);
  };
  return integrate(f, 0.0, T, 1e-10);
}

double exit_time_tail_bound(double k, double eps, double x, double T) {
  return std::sqrt(2.0 * eps / M_PI) * x / (k * k * std::pow(T, 1.5)) *
         std::exp(-0.5 * k * k * T / eps);
}

DualCostResult dual_cost_solve(
    const std::function<double(double, double)>& lambda_drift, double eps,
    double t0, double T, double x_far, const std::function<double(double)>& v0,
    DualCostOptions opt) {
  if (eps <= 0.0 || !(T > t0) || x_far <= 0.0) {
    throw std::invalid_argument("dual_cost_solve: bad arguments");
  }
  const double h = (opt.h > 0.0) ? opt.h : eps / 40.0;
  const std::size_t n = static_cast<std::size_t>(x_far / h) + 2;
  DualCostResult out;
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x[i] = h * static_cast<double>(i);

  std::vector<double> v(n), vn(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v0(out.x[i]), 0.0, 1.0);
  v[0] = 1.0;
  v[n - 1] = 0.0;

  std::vector<double> lo(n), dg(n), up(n), rhs(n), tmp(n);
  const double d = 0.5 * eps;
  double t = t0;
  while (t < T - 1e-12 * (1.0 + T)) {
    const double dt = std::min(std::max(opt.dt0, opt.dt_growth * t), T - t);
    const double th = opt.theta;
    const double t_eval = std::min(t + th * dt, T);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double b = -lambda_drift(out.x[i], t_eval);
      const double rho = b * h / (2.0 * d);
      const double fitted =
          d * ((std::fabs(rho) < 1e-4) ? 1.0 + rho * rho / 3.0
                                       : rho / std::tanh(rho));
      const double cp = b / (2.0 * h) + fitted / (h * h);
      const double cm = -b / (2.0 * h) + fitted / (h * h);
      const double c0 = -2.0 * fitted / (h * h);
      lo[i] = -th * dt * cm;
      dg[i] = 1.0 - th * dt * c0;
      up[i] = -th * dt * cp;
      rhs[i] = v[i] + (1.0 - th) * dt *
                          (cm * v[i - 1] + c0 * v[i] + cp * v[i + 1]);
    }
    rhs[1] -= lo[1] * 1.0;  // v(0) = 1
    lo[1] = 0.0;
    rhs[n - 2] -= up[n - 2] * 0.0;
    up[n - 2] = 0.0;

    tmp[1] = up[1] / dg[1];
    rhs[1] = rhs[1] / dg[1];
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double m = dg[i] - lo[i] * tmp[i - 1];
      tmp[i] = up[i] / m;
      rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / m;
    }
    vn[n - 2] = rhs[n - 2];
    for (std::size_t i = n - 2; i-- > 1;) {
      vn[i] = rhs[i] - tmp[i] * vn[i + 1];
    }
    vn[0] = 1.0;
    vn[n - 1] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) vn[i] = std::clamp(vn[i], 0.0, 1.0);
    v.swap(vn);
    t += dt;
  }

  out.v = v;
  out.q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.q[i] = (v[i] > opt.v_floor)
                   ? -eps * std::log(v[i])
                   : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

DualCostResult const_drift_cost(double k, double eps, double T, double x_far,
                                const std::function<double(double)>& q0,
                                DualCostOptions opt) {
  auto lambda = [k](double, double) { return -k; };
  auto v0 = [&](double x) {
    if (x == 0.0) return 1.0;
    const double q = q0(x);
    return (q / eps > 700.0) ? 0.0 : std::exp(-q / eps);
  };
  return dual_cost_solve(lambda, eps, 0.0, T, x_far, v0, opt);
}

std::vector<double> Path::times() const {
  const std::size_t m = interior.size() + 1;
  std::vector<double> ts(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    ts[j] = tau + (t_end - tau) * static_cast<double>(j) / static_cast<double>(m);
  }
  return ts;
}

std::vector<double> Path::knots() const {
  std::vector<double> k;
  k.reserve(interior.size() + 2);
  k.push_back(0.0);
  for (double v : interior) k.push_back(v);
  k.push_back(x_end);
  return k;
}

double action(const Path& path,
              const std::function<double(double, double)>& drift) {
  const auto ts = path.times();
  const auto xs = path.knots();
  const double ds = ts[1] - ts[0];
  if (!(ds > 0.0)) throw std::invalid_argument("action: degenerate path");
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
    const double u = (xs[j + 1] - xs[j]) / ds;
    const double r0 = u - drift(xs[j], ts[j]);
    const double r1 = u - drift(xs[j + 1], ts[j + 1]);
    acc += 0.25 * ds * (r0 * r0 + r1 * r1);
  }
  return acc;
}

double action(const Path& path, const RateHistory& A, double y) {
  const kernels::MomentTable table(A);
  return action(path, [&](double x, double s) { return table.drift(x, y, s); });
}

namespace {

// minimize the (convex, quadratic) action over interior knots at fixed exit
// time by projected gradient descent with a parabolic line search
double minimize_knots(Path& path,
                      const std::function<double(double, double)>& drift,
                      bool* converged) {
  const double floor_x = 1e-10 * std::max(path.x_end, 1.0);
  const auto ts = path.times();
  const std::size_t m = path.interior.size() + 1;
  const double ds = ts[1] - ts[0];

  std::vector<double> dldx(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    const double xj = (j == 0) ? 0.0 : (j == m ? path.x_end : path.interior[j - 1]);
    const double delta = 1e-6 * (1.0 + std::fabs(xj));
    dldx[j] = (drift(xj + delta, ts[j]) - drift(std::max(xj - delta, 0.0), ts[j])) /
              (delta + std::min(delta, xj));
  }

  auto eval = [&](const std::vector<double>& interior) {
    Path p = path;
    p.interior = interior;
    return action(p, drift);
  };

  auto grad = [&](const std::vector<double>& interior, std::vector<double>& g) {
    std::vector<double> xs;
    xs.reserve(m + 1);
    xs.push_back(0.0);
    for (double v : interior) xs.push_back(v);
    xs.push_back(path.x_end);
    std::vector<double> u(m), lam(m + 1);
    for (std::size_t j = 0; j < m; ++j) u[j] = (xs[j + 1] - xs[j]) / ds;
    for (std::size_t j = 0; j <= m; ++j) lam[j] = drift(xs[j], ts[j]);
    g.assign(m - 1, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
      g[i - 1] = 0.5 * ((u[i - 1] - lam[i - 1]) + (u[i - 1] - lam[i]) -
                        (u[i] - lam[i]) - (u[i] - lam[i + 1])) -
                 0.5 * ds * dldx[i] * ((u[i] - lam[i]) + (u[i - 1] - lam[i]));
    }
  };

  std::vector<double> xcur = path.interior, g, trial1, trial2;
  double a0 = eval(xcur);
  bool ok = false;
  for (int it = 0; it < 400; ++it) {
    grad(xcur, g);
    double gnorm2 = 0.0;
    for (double v : g) gnorm2 += v * v;
    if (gnorm2 < 1e-18 * (1.0 + a0 * a0)) {
      ok = true;
      break;
    }
    // parabolic exact step for the quadratic action
    const double abar = 0.1 * ds / std::sqrt(gnorm2 / g.size() + 1e-30);
    trial1 = xcur;
    trial2 = xcur;
    for (std::size_t i = 0; i < g.size(); ++i) {
      trial1[i] = std::max(xcur[i] - abar * g[i], floor_x);
      trial2[i] = std::max(xcur[i] - 2.0 * abar * g[i], floor_x);
    }
    const double a1 = eval(trial1);
    const double a2 = eval(trial2);
    const double curv = (a2 - 2.0 * a1 + a0) / (abar * abar);
    double alpha = 2.0 * abar;
    if (curv > 0.0) {
      const double slope = (4.0 * a1 - a2 - 3.0 * a0) / (2.0 * abar);
      alpha = std::clamp(-slope / curv, 1e-3 * abar, 50.0 * abar);
    }
    double best = a0;
    std::vector<double> next = xcur;
    for (double scale : {1.0, 0.5, 0.25}) {
      std::vector<double> cand = xcur;
      for (std::size_t i = 0; i < g.size(); ++i) {
        cand[i] = std::max(xcur[i] - scale * alpha * g[i], floor_x);
      }
      const double val = eval(cand);
      if (val < best) {
        best = val;
        next = cand;
        break;
      }
    }
    if (best >= a0 - 1e-13 * (1.0 + a0)) {
      xcur = next;
      a0 = std::min(best, a0);
      ok = true;
      break;
    }
    xcur = next;
    a0 = best;
  }
  path.interior = xcur;
  if (converged) *converged = ok;
  return a0;
}

double best_for_tau(double tau, double x, double T,
                    const std::function<double(double, double)>& drift,
                    const std::function<double(double)>& classical_guess,
                    int knots, bool* conv) {
  const std::size_t m = static_cast<std::size_t>(knots);
  Path straight;
  straight.tau = tau;
  straight.t_end = T;
  straight.x_end = x;
  straight.interior.resize(m - 1);
  const auto ts = straight.times();
  for (std::size_t j = 1; j < m; ++j) {
    straight.interior[j - 1] =
        std::max(x * static_cast<double>(j) / static_cast<double>(m), 1e-9 * x);
  }
  bool c1 = true, c2 = true;
  const double v1 = minimize_knots(straight, drift, &c1);

  Path clipped = straight;
  for (std::size_t j = 1; j < m; ++j) {
    clipped.interior[j - 1] = std::max(classical_guess(ts[j]), 1e-9 * x);
  }
  const double v2 = minimize_knots(clipped, drift, &c2);
  if (conv) *conv = c1 || c2;
  return std::min(v1, v2);
}

}  // namespace

BruteForceResult bruteforce_cost(
    double x, double T, const std::function<double(double, double)>& drift,
    const std::function<double(double)>& classical_guess, int knots,
    int tau_grid) {
  if (knots < 16 || tau_grid < 32) {
    throw std::invalid_argument("bruteforce_cost: resolution below minimum");
  }
  if (!(x > 0.0) || !(T > 0.0)) {
    throw std::invalid_argument("bruteforce_cost: x, T must be positive");
  }
  const double tau_min = 1e-3 * T;
  // exit-duration scan, log-spaced, then golden-section refinement
  const double s_lo = std::min(0.05 * x, 0.2 * (T - tau_min));
  const double s_hi = T - tau_min;
  BruteForceResult out;
  out.cost = std::numeric_limits<double>::infinity();
  bool any_conv = false;
  std::vector<double> durations;
  for (int i = 0; i < tau_grid; ++i) {
    durations.push_back(
        s_lo * std::pow(s_hi / s_lo,
                        static_cast<double>(i) / static_cast<double>(tau_grid - 1)));
  }
  for (double s : durations) {
    bool conv = false;
    const double val = best_for_tau(T - s, x, T, drift, classical_guess, knots,
                                    &conv);
    any_conv = any_conv || conv;
    if (val < out.cost) {
      out.cost = val;
      out.tau = T - s;
    }
  }
  // golden-section around the best duration
  {
    const double golden = 0.6180339887498949;
    double sb = T - out.tau;
    double lo = sb / 1.6, hi = std::min(sb * 1.6, s_hi);
    double c = hi - golden * (hi - lo);
    double d = lo + golden * (hi - lo);
    bool cv = false;
    double fc = best_for_tau(T - c, x, T, drift, classical_guess, knots, &cv);
    double fd = best_for_tau(T - d, x, T, drift, classical_guess, knots, &cv);
    for (int it = 0; it < 12; ++it) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - golden * (hi - lo);
        fc = best_for_tau(T - c, x, T, drift, classical_guess, knots, &cv);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + golden * (hi - lo);
        fd = best_for_tau(T - d, x, T, drift, classical_guess, knots, &cv);
      }
    }
    const double val = std::min(fc, fd);
    if (val < out.cost) {
      out.cost = val;
      out.tau = T - (fc < fd ? c : d);
    }
  }
  out.converged = any_conv;
  return out;
}

BruteForceResult bruteforce_cost(double x, double y, double T,
                                 const RateHistory& A, int knots, int tau_grid) {
  const auto table = std::make_shared<kernels::MomentTable>(A);
  auto drift = [table, y](double xv, double s) { return table->drift(xv, y, s); };
  auto guess = [&, y](double s) {
    return kernels::classical_path(A, x, y, s, T);
  };
  // precompute the zero-noise path on the knot times once; the shooting
  // inside classical_path is what dominates otherwise
  return bruteforce_cost(x, T, drift, guess, knots, tau_grid);
}

namespace {

// shoot the wall-leaving characteristic from exit time tau and return its
// position at time T
double shoot(const kernels::MomentTable& table, double y, double tau, double T,
             int steps = 1200) {
  const double g2tau = table.dispersion_gap(tau);
  auto rhs = [&](double s, double xv) {
    const double s2 = table.sigma2(s);
    return (table.inv_lambda(s) + 1.0 / s2) * xv +
           table.m1(s) / s2 * (y + 2.0 * g2tau - table.dispersion_gap(s));
  };
  double xv = 0.0;
  double s = tau;
  const double ds = (T - tau) / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = rhs(s, xv);
    const double k2 = rhs(s + 0.5 * ds, xv + 0.5 * ds * k1);
    const double k3 = rhs(s + 0.5 * ds, xv + 0.5 * ds * k2);
    const double k4 = rhs(s + ds, xv + ds * k3);
    xv += ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s += ds;
  }
  return xv;
}

double exit_time_for(const kernels::MomentTable& table, double y, double x,
                     double T) {
  // the characteristic position at T decreases in the exit time on the
  // covered patch; bracket then bisect
  const double tau_hi = T * (1.0 - 1e-9);
  double lo = std::max(table.t_front() + 1e-6 * (T - table.t_front()), 1e-8);
  double x_lo = shoot(table, y, lo, T);
  if (x_lo < x) {
    throw std::domain_error("characteristics: target outside the covered patch");
  }
  double hi = tau_hi;
  double a = lo, b = hi;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (a + b);
    const double xm = shoot(table, y, mid, T);
    if (xm > x) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double characteristics_gradient(double x, double y, double T,
                                const RateHistory& A) {
  const kernels::MomentTable table(A);
  const double tau = exit_time_for(table, y, x, T);
  return 2.0 * table.m1(T) * (y + table.dispersion_gap(tau)) / table.sigma2(T);
}

double characteristics_cost(double x, double y, double T, const RateHistory& A) {
  if (!(x > 0.0) || !(y > 0.0)) {
    throw std::invalid_argument("characteristics_cost: x, y must be positive");
  }
  const kernels::MomentTable table(A);
  // 24-node Gauss-Legendre on [0, x] of the gradient formula
  static const double gl_x[12] = {
      0.064056892862605626085, 0.191118867473616309159, 0.315042679696163374387,
      0.433793507626045138487, 0.545421471388839535658, 0.648093651936975569252,
      0.740124191578554364244, 0.820001985973902921954, 0.886415527004401034213,
      0.938274552002732758524, 0.974728555971309498198, 0.995187219997021360180};
  static const double gl_w[12] = {
      0.127938195346752156974, 0.125837456346828296121, 0.121670472927803391204,
      0.115505668053725601353, 0.107444270115965634783, 0.097618652104113888270,
      0.086190161531953275917, 0.073346481411080305734, 0.059298584915436780746,
      0.044277438817419806169, 0.028531388628933663181, 0.012341229799987199547};
  double acc = 0.0;
  const double m1T = table.m1(T);
  const double s2T = table.sigma2(T);
  for (int i = 0; i < 12; ++i) {
    for (double sgn : {-1.0, 1.0}) {
      const double xi = 0.5 * x * (1.0 + sgn * gl_x[i]);
      const double tau = exit_time_for(table, y, xi, T);
      acc += 0.5 * x * gl_w[i] * 2.0 * m1T * (y + table.dispersion_gap(tau)) / s2T;
    }
  }
  return acc;
}

}  // namespace cp::exitcost
