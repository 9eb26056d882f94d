#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cplab/density.hpp"
#include "cplab/measures.hpp"
#include "cplab/quadrature.hpp"

using namespace cp;
namespace ms = cp::measures;

namespace {

GridDensity unit_exponential(std::size_t n = 300001, double x_end = 45.0) {
  return sample_density(uniform_grid(0.0, x_end, n),
                        [](double x) { return std::exp(-x); });
}

}  // namespace

TEST_CASE("self-similar family: closed forms and normalization") {
  const SelfSimilarFamily exp1(1.0);
  for (double x : {0.0, 0.3, 2.0, 7.0}) {
    CHECK(exp1.survival(x) == doctest::Approx(std::exp(-x)).epsilon(1e-14));
  }
  CHECK(SelfSimilarFamily(0.5).support_end() == doctest::Approx(2.0));
  CHECK(std::isinf(SelfSimilarFamily(1.0).support_end()));
  CHECK_THROWS(SelfSimilarFamily(0.0));
  CHECK_THROWS(SelfSimilarFamily(-1.0));

  for (double b : {0.25, 0.5, 0.75, 1.0, 1.5}) {
    const auto d = ms::selfsimilar_init(b, ms::selfsimilar_grid(b, 100000));
    CHECK(ms::mean(d) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(total_mass(d) > 0.0);
  }
}

TEST_CASE("tail_functions: exponential density has unit beta") {
  const auto p = ms::tail_functions(unit_exponential());
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    if (p.x[i] > 8.0) break;
    CHECK(p.beta[i] == doctest::Approx(1.0).epsilon(1e-6));
  }
  // h(0) equals the first moment
  CHECK(p.h.front() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("tail_functions: self-similar members have constant beta") {
  for (double b : {0.25, 0.5, 0.75, 1.0}) {
    const auto d = ms::selfsimilar_init(b, ms::selfsimilar_grid(b, 240000));
    const auto p = ms::tail_functions(d);
    const double guard = 1e-6 * p.w.front();
    double worst = 0.0;
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      if (!(p.w[i] > guard)) break;
      if (std::isnan(p.beta[i])) continue;
      worst = std::max(worst, std::fabs(p.beta[i] - b));
    }
    CAPTURE(b);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("tail_functions: degenerate inputs") {
  GridDensity zero;
  zero.grid = {0.0, 1.0, 2.0};
  zero.values = {0.0, 0.0, 0.0};
  CHECK_THROWS(ms::tail_functions(zero));
  GridDensity bad;
  bad.grid = {0.0, 1.0};
  bad.values = {1.0, -0.5};
  CHECK_THROWS(ms::tail_functions(bad));
}

TEST_CASE("residual_mean: memorylessness and the derivative identity") {
  const auto expd = unit_exponential();
  for (double x : {0.0, 0.5, 2.0, 6.0}) {
    CHECK(ms::residual_mean(expd, x) == doctest::Approx(1.0).epsilon(1e-6));
  }

  // half-Gaussian profile: -d/dx E[X-x | X>x] = 1 - beta(x)
  const auto g = sample_density(uniform_grid(0.0, 10.0, 40001),
                                [](double x) { return std::exp(-0.5 * x * x); });
  const auto p = ms::tail_functions(g);
  const PiecewiseLinear beta_of_x(p.x, p.beta);
  for (double x : {0.3, 1.0, 2.0}) {
    const double dx = 1e-3;
    const double fd =
        (ms::residual_mean(g, x + dx) - ms::residual_mean(g, x - dx)) / (2.0 * dx);
    CHECK(-fd == doctest::Approx(1.0 - beta_of_x(x)).epsilon(1e-4).scale(1.0));
  }

  // tail reconstruction from the residual mean
  std::vector<double> xs, vs;
  for (int i = 0; i <= 4000; ++i) {
    const double x = 6.0 * i / 4000.0;
    xs.push_back(x);
    vs.push_back(1.0 / ms::residual_mean(g, x));
  }
  double acc = 0.0;
  const PiecewiseLinear h_of_x(p.x, p.h);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    acc += 0.5 * (vs[i] + vs[i - 1]) * (xs[i] - xs[i - 1]);
    const double recon = p.h.front() * std::exp(-acc);
    CHECK(recon == doctest::Approx(h_of_x(xs[i])).epsilon(1e-6));
  }

  CHECK_THROWS(ms::residual_mean(expd, 44.9));  // tail exhausted
  CHECK_THROWS(ms::residual_mean(expd, -1.0));
}

TEST_CASE("ks_exponential: self distance, uniform value, scale invariance") {
  CHECK(ms::ks_exponential(unit_exponential()) < 1e-6);

  // uniform on [0, 1] scaled to unit mean is uniform on [0, 2]; the distance
  // to Exp(1) is |ln2/2 - 1/2| attained at x = ln 2
  const double expected = 0.5 - 0.5 * std::log(2.0);
  const auto u01 = sample_density(uniform_grid(0.0, 1.0, 20001),
                                  [](double) { return 1.0; });
  CHECK(ms::ks_exponential(u01) == doctest::Approx(expected).epsilon(1e-6));

  // the beta = 1/2 member is uniform on [0, 2]
  const auto d = ms::selfsimilar_init(0.5, ms::selfsimilar_grid(0.5, 50000));
  CHECK(ms::ks_exponential(d) == doctest::Approx(expected).epsilon(1e-5));
  CHECK(ms::ks_exponential(d) > 0.1);

  for (double lam : {0.5, 2.0, 10.0}) {
    GridDensity scaled;
    for (double x : u01.grid) scaled.grid.push_back(lam * x);
    for (double v : u01.values) scaled.values.push_back(v / lam);
    CHECK(ms::ks_exponential(scaled) ==
          doctest::Approx(ms::ks_exponential(u01)).epsilon(1e-10));
  }
}

TEST_CASE("mean") {
  CHECK(ms::mean(unit_exponential()) == doctest::Approx(1.0).epsilon(1e-8));
  const auto u01 = sample_density(uniform_grid(0.0, 1.0, 10001),
                                  [](double) { return 3.7; });
  CHECK(ms::mean(u01) == doctest::Approx(0.5).epsilon(1e-10));
  GridDensity zero;
  zero.grid = {0.0, 1.0};
  zero.values = {0.0, 0.0};
  CHECK_THROWS(ms::mean(zero));
}

TEST_CASE("profile heads match direct quadrature") {
  for (double b : {0.25, 0.75, 1.0}) {
    const auto d = ms::selfsimilar_init(b, ms::selfsimilar_grid(b, 50000));
    const auto p = ms::tail_functions(d);
    CHECK(p.w.front() == doctest::Approx(total_mass(d)).epsilon(1e-10));
    // first moment as panel mass times panel midpoint: the exact discrete
    // counterpart of integrating the tail function
    double direct_h0 = d.truncation_tail +
                       d.truncation_mass * (d.grid.back() - d.grid.front());
    for (std::size_t k = 0; k + 1 < d.grid.size(); ++k) {
      const double pm = 0.5 * (d.values[k] + d.values[k + 1]) *
                        (d.grid[k + 1] - d.grid[k]);
      direct_h0 += pm * (0.5 * (d.grid[k] + d.grid[k + 1]) - d.grid.front());
    }
    CHECK(p.h.front() == doctest::Approx(direct_h0).epsilon(1e-10));
    // and against the analytic unit mean, at quadrature accuracy
    CHECK(p.h.front() == doctest::Approx(1.0).epsilon(1e-7));
  }
}
