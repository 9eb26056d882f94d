#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cplab/kernels.hpp"
#include "cplab/quadrature.hpp"
#include "cplab/rate_history.hpp"

using namespace cp;
using kernels::moments;

namespace {

// Lambda large enough that A = 1/Lambda is numerically zero.
RateHistory zero_rate(double t_end) { return RateHistory::constant(1e300, 0.0, t_end); }

RateHistory random_history(std::mt19937& rng, int segments = 8) {
  std::uniform_real_distribution<double> dt(0.1, 1.0);
  std::uniform_real_distribution<double> l0(0.3, 3.0);
  std::uniform_real_distribution<double> step(-0.3, 0.5);
  std::vector<double> t{0.0}, lam{l0(rng)};
  for (int i = 0; i < segments; ++i) {
    t.push_back(t.back() + dt(rng));
    lam.push_back(lam.back() * std::exp(step(rng)));
  }
  return RateHistory(std::move(t), std::move(lam));
}

}  // namespace

TEST_CASE("moments: zero drift coefficient gives (1, T, T)") {
  const double T = 3.7;
  const auto m = moments(zero_rate(10.0), 0.0, T);
  CHECK(m.m1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.m2 == doctest::Approx(T).epsilon(1e-12));
  CHECK(m.sigma2 == doctest::Approx(T).epsilon(1e-12));
}

TEST_CASE("moments: constant coefficient matches closed forms") {
  // A = a constant: m1 = e^{aT}, m2 = (e^{aT}-1)/a, sigma2 = (e^{2aT}-1)/(2a)
  for (double a : {0.25, 0.8, 2.0}) {
    const double T = 2.3;
    const auto h = RateHistory::constant(1.0 / a, 0.0, 4.0);
    const auto m = moments(h, 0.0, T);
    CHECK(m.m1 == doctest::Approx(std::exp(a * T)).epsilon(1e-12));
    CHECK(m.m2 == doctest::Approx((std::exp(a * T) - 1.0) / a).epsilon(1e-10));
    CHECK(m.sigma2 ==
          doctest::Approx((std::exp(2.0 * a * T) - 1.0) / (2.0 * a)).epsilon(1e-10));
  }
}

TEST_CASE("moments: degenerate interval and preconditions") {
  const auto h = RateHistory::constant(2.0, 0.0, 1.0);
  const auto m = moments(h, 0.5, 0.5);
  CHECK(m.m1 == 1.0);
  CHECK(m.m2 == 0.0);
  CHECK(m.sigma2 == 0.0);
  CHECK_THROWS(moments(h, 0.0, 2.0));
  CHECK_THROWS(moments(h, -0.5, 0.5));
  CHECK_THROWS(moments(h, 0.8, 0.2));
}

TEST_CASE("moments: ratio identities against independent quadrature") {
  std::mt19937 rng(12345);
  for (int trial = 0; trial < 6; ++trial) {
    const auto h = random_history(rng);
    const double T = h.t_back();
    const auto m = moments(h, 0.0, T);
    CHECK(m.m1 >= 1.0);
    CHECK(m.sigma2 / m.m2 <= m.m1 * (1.0 + 1e-12));
    const double i1 =
        integrate([&](double t) { return 1.0 / moments(h, 0.0, t).m1; }, 0.0, T, 1e-11);
    const double i2 = integrate(
        [&](double t) {
          const double m1 = moments(h, 0.0, t).m1;
          return 1.0 / (m1 * m1);
        },
        0.0, T, 1e-11);
    CHECK(m.m2 / m.m1 == doctest::Approx(i1).epsilon(1e-8));
    CHECK(m.sigma2 / (m.m1 * m.m1) == doctest::Approx(i2).epsilon(1e-8));
  }
}

TEST_CASE("moments: interval composition") {
  std::mt19937 rng(777);
  for (int trial = 0; trial < 6; ++trial) {
    const auto h = random_history(rng);
    const double T = h.t_back();
    const double s = 0.37 * T;
    const auto full = moments(h, 0.0, T);
    const auto left = moments(h, 0.0, s);
    const auto right = moments(h, s, T);
    CHECK(full.m1 == doctest::Approx(left.m1 * right.m1).epsilon(1e-10));
    CHECK(full.m2 ==
          doctest::Approx(right.m2 + right.m1 * left.m2).epsilon(1e-9));
    CHECK(full.sigma2 ==
          doctest::Approx(right.sigma2 + right.m1 * right.m1 * left.sigma2)
              .epsilon(1e-9));
  }
}

TEST_CASE("moments: flow-variance identity on random histories") {
  // integral_s^T m1(u)^2/sigma2(u)^2 du = m1(s)^2 sigma2(s,T)/(sigma2(T) sigma2(s))
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 4; ++trial) {
    const auto h = random_history(rng);
    const double T = h.t_back();
    const double s = std::max(0.25 * T, 0.2);
    const auto ms = moments(h, 0.0, s);
    const auto mT = moments(h, 0.0, T);
    const auto msT = moments(h, s, T);
    const double rhs = ms.m1 * ms.m1 * msT.sigma2 / (mT.sigma2 * ms.sigma2);
    const double lhs = integrate(
        [&](double u) {
          const auto mu = moments(h, 0.0, u);
          return mu.m1 * mu.m1 / (mu.sigma2 * mu.sigma2);
        },
        s, T, 1e-9);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
  }
}

TEST_CASE("whole_line_green: normalization, zero-drift shape, peak location") {
  std::mt19937 rng(5);
  const auto h = random_history(rng);
  const double T = h.t_back();
  const double eps = 0.23;
  const double y = 1.4;
  const auto m = moments(h, 0.0, T);
  const double mean = m.m1 * y - m.m2;
  const double sd = std::sqrt(eps * m.sigma2);

  std::vector<double> xs, g;
  const int n = 2001;
  for (int i = 0; i < n; ++i) {
    const double x = mean - 8.0 * sd + 16.0 * sd * i / (n - 1);
    xs.push_back(x);
    g.push_back(kernels::whole_line_green(h, eps, x, y, T));
  }
  CHECK(integrate_samples(xs, g) == doctest::Approx(1.0).epsilon(1e-8));

  // peak at the kernel mean
  std::size_t imax = 0;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (g[i] > g[imax]) imax = i;
  CHECK(std::fabs(xs[imax] - mean) <= 16.0 * sd / (n - 1));

  // zero drift: Gaussian with mean y - T, variance eps*T
  const auto z = zero_rate(2.0);
  const double T0 = 1.3, e0 = 0.4, y0 = 2.0;
  for (double x : {-0.5, 0.7, 2.9}) {
    const double v = e0 * T0;
    const double expect =
        std::exp(-0.5 * (x - (y0 - T0)) * (x - (y0 - T0)) / v) / std::sqrt(2.0 * M_PI * v);
    CHECK(kernels::whole_line_green(z, e0, x, y0, T0) ==
          doctest::Approx(expect).epsilon(1e-10));
  }
  CHECK_THROWS(kernels::whole_line_green(h, -1.0, 0.0, y, T));
  CHECK_THROWS(kernels::whole_line_green(h, 0.4, 0.0, y, 0.0));
}

TEST_CASE("standardized_offset: exact relation and zero-drift values") {
  const auto z = zero_rate(2.0);
  const auto o = kernels::standardized_offset(z, 0.0, 1.0);
  CHECK(o.z == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(o.a == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(o.b == doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937 rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const auto h = random_history(rng);
    const double T = 0.9 * h.t_back();
    const auto m = moments(h, 0.0, T);
    std::uniform_real_distribution<double> yd(0.1, 4.0);
    const double y = yd(rng);
    const auto so = kernels::standardized_offset(h, y, T);
    const double sd = std::sqrt(m.sigma2);
    CHECK(so.z == doctest::Approx((m.m2 - m.m1 * y) / sd).epsilon(1e-10));
    CHECK(so.z == doctest::Approx(so.a - so.b * y).epsilon(1e-12));
    // y at the transported mean zeroes the offset
    const auto so0 = kernels::standardized_offset(h, m.m2 / m.m1, T);
    CHECK(std::fabs(so0.z) < 1e-10 * so0.a);
  }
  CHECK_THROWS(kernels::standardized_offset(zero_rate(1.0), 1.0, 0.0));
}

TEST_CASE("classical_path: endpoint limits") {
  std::mt19937 rng(31);
  const auto h = random_history(rng);
  const double T = h.t_back();
  const double x = 0.8, y = 1.7;
  CHECK(kernels::classical_path(h, x, y, T, T) == doctest::Approx(x).epsilon(1e-12));
  CHECK(kernels::classical_path(h, x, y, 0.0, T) == doctest::Approx(y).epsilon(1e-12));
  // continuity in s
  double prev = kernels::classical_path(h, x, y, 0.0, T);
  for (int i = 1; i <= 50; ++i) {
    const double s = T * i / 50.0;
    const double cur = kernels::classical_path(h, x, y, s, T);
    CHECK(std::fabs(cur - prev) < 1.0);  // no jumps on this scale
    prev = cur;
  }
}

TEST_CASE("classical_path: zero drift closed form") {
  const auto z = zero_rate(3.0);
  const double x = 0.6, y = 2.0, T = 2.5;
  for (double s : {0.1, 1.0, 2.0}) {
    CHECK(kernels::classical_path(z, x, y, s, T) ==
          doctest::Approx((x * s + y * (T - s)) / T).epsilon(1e-10));
  }
}

TEST_CASE("classical_path: satisfies the drift ODE (RK4 oracle)") {
  // integrate dx/ds = drift(x, y, s) backward from (T, x); independent check
  std::vector<double> t{0.0, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> lam{1.0, 2.0, 3.0, 4.0, 5.0};
  const RateHistory h(t, lam);
  const double x = 0.9, y = 1.5, T = 4.0, s_end = 0.5;
  auto f = [&](double s, double xv) { return kernels::drift(h, xv, y, s); };
  double xs = x;
  const int n = 7000;
  const double ds = (T - s_end) / n;
  double s = T;
  for (int i = 0; i < n; ++i) {
    const double k1 = f(s, xs);
    const double k2 = f(s - 0.5 * ds, xs - 0.5 * ds * k1);
    const double k3 = f(s - 0.5 * ds, xs - 0.5 * ds * k2);
    const double k4 = f(s - ds, xs - ds * k3);
    xs -= ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s -= ds;
  }
  CHECK(kernels::classical_path(h, x, y, s_end, T) ==
        doctest::Approx(xs).epsilon(1e-7));
}

TEST_CASE("drift: zero-coefficient closed form and singularity") {
  const auto z = zero_rate(3.0);
  for (double s : {0.4, 1.0, 2.5}) {
    CHECK(kernels::drift(z, 1.7, 0.9, s) ==
          doctest::Approx((1.7 - 0.9) / s).epsilon(1e-9));
    CHECK(std::fabs(kernels::drift(z, 1.3, 1.3, s)) < 1e-12);
  }
  CHECK_THROWS(kernels::drift(z, 1.0, 1.0, 0.0));
}

TEST_CASE("drift: approaches -1 along a growing history") {
  // Lambda = 1 + t keeps all asymptotic conditions; |drift + 1| shrinks in s
  std::vector<double> t, lam;
  for (int i = 0; i <= 4000; ++i) {
    t.push_back(i * 0.5);
    lam.push_back(1.0 + t.back());
  }
  const RateHistory h(t, lam);
  const double x = 1.0, y = 1.0;
  double prev = std::fabs(kernels::drift(h, x, y, 50.0) + 1.0);
  for (double s : {200.0, 800.0, 2000.0}) {
    const double cur = std::fabs(kernels::drift(h, x, y, s) + 1.0);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("dispersion_gap: zero at zero coefficient, derivative identity, monotone") {
  const auto z = zero_rate(3.0);
  CHECK(std::fabs(kernels::dispersion_gap(z, 2.0)) < 1e-10);

  std::vector<double> t, lam;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(i * 0.1);
    lam.push_back(1.0 + t.back());
  }
  const RateHistory h(t, lam);
  double prev = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double s = 0.5 * i;
    const double g = kernels::dispersion_gap(h, s);
    CHECK(g >= prev - 1e-12);
    prev = g;
  }
  // d/ds gap = A(s) sigma2(s) / m1(s), finite differences
  const double s0 = 4.0, ds = 1e-4;
  const double fd = (kernels::dispersion_gap(h, s0 + ds) -
                     kernels::dispersion_gap(h, s0 - ds)) /
                    (2.0 * ds);
  const auto m = moments(h, 0.0, s0);
  CHECK(fd == doctest::Approx(h.inv_lambda(s0) * m.sigma2 / m.m1).epsilon(1e-6));
}

TEST_CASE("rate history: interpolation, integral, extension contract") {
  RateHistory h({0.0, 1.0, 3.0}, {1.0, 2.0, 2.0});
  CHECK(h.lambda(0.5) == doctest::Approx(1.5));
  CHECK(h.lambda(2.0) == doctest::Approx(2.0));
  // exact log integral over the linear segment
  CHECK(h.inv_lambda_integral(0.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(h.inv_lambda_integral(1.0, 3.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS(h.lambda(3.5));
  CHECK_THROWS(h.lambda(-0.1));
  h.extend(4.0, 5.0);
  CHECK(h.lambda(3.5) > 2.0);
  CHECK_THROWS(h.extend(3.9, 1.0));
  CHECK_THROWS(h.extend(5.0, -1.0));
  CHECK_THROWS(RateHistory({0.0, 0.0}, {1.0, 1.0}));
  CHECK_THROWS(RateHistory({0.0, 1.0}, {1.0, 0.0}));
}
