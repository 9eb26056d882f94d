#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cplab/classical.hpp"
#include "cplab/measures.hpp"
#include "cplab/quadrature.hpp"

using namespace cp;
namespace cl = cp::classical;

TEST_CASE("transport_map: identity at t = 0, shift under zero coefficient") {
  const auto z = RateHistory::constant(1e300, 0.0, 3.0);
  for (double x : {0.0, 0.7, 2.2}) {
    CHECK(cl::transport_map(z, x, 0.0) == doctest::Approx(x).epsilon(1e-13));
    CHECK(cl::transport_map(z, x, 1.8) == doctest::Approx(x + 1.8).epsilon(1e-12));
  }
  // strictly increasing in x
  const RateHistory h({0.0, 1.0, 2.0}, {1.0, 1.5, 2.5});
  double prev = cl::transport_map(h, 0.0, 1.7);
  for (double x : {0.3, 0.9, 1.4, 3.0}) {
    const double cur = cl::transport_map(h, x, 1.7);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("self-similar members coarsen at rate beta") {
  for (double b : {0.5, 1.0}) {
    cl::Evolver e{SelfSimilarFamily(b)};
    e.advance_to(5.0);
    const auto traj = e.take_trajectory();
    const auto ts = traj.column("t");
    const auto lams = traj.column("Lambda");
    // mean growth over [0, 5] and locally along the run
    CHECK((lams.back() - lams.front()) / (ts.back() - ts.front()) ==
          doctest::Approx(b).epsilon(0.01));
    for (std::size_t i = 1; i < ts.size(); ++i) {
      const double slope = (lams[i] - lams[i - 1]) / (ts[i] - ts[i - 1]);
      CHECK(slope == doctest::Approx(b).epsilon(0.01));
    }
    // reported rate equals beta along the whole run
    for (double r : traj.column("dLambda_dt")) {
      CHECK(r == doctest::Approx(b).epsilon(0.01));
    }
  }
}

TEST_CASE("coarsening rate: exponential and uniform members") {
  cl::Evolver exp_state{SelfSimilarFamily(1.0)};
  CHECK(exp_state.coarsening_rate() == doctest::Approx(1.0).epsilon(1e-9));
  cl::Evolver half{SelfSimilarFamily(0.5)};
  CHECK(half.coarsening_rate() == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("rate equals the finite-difference slope of Lambda") {
  cl::Options opt;
  opt.dt = 5e-4;
  opt.sample_interval = 0.05;
  cl::Evolver e(SelfSimilarFamily(0.75), opt);
  e.advance_to(2.0);
  const auto traj = e.take_trajectory();
  const auto ts = traj.column("t");
  const auto lams = traj.column("Lambda");
  const auto rates = traj.column("dLambda_dt");
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    const double fd = (lams[i + 1] - lams[i - 1]) / (ts[i + 1] - ts[i - 1]);
    CHECK(rates[i] == doctest::Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("sampled initial data round-trips through the evolver") {
  // the beta = 1/2 member fed in as plain samples: rate still 1/2
  const auto d = measures::selfsimilar_init(0.5, measures::selfsimilar_grid(0.5, 40000));
  cl::Options opt;
  opt.dt = 1e-3;
  cl::Evolver e(d, opt);
  e.advance_to(3.0);
  const auto traj = e.take_trajectory();
  const auto ts = traj.column("t");
  const auto lams = traj.column("Lambda");
  CHECK((lams.back() - lams.front()) / (ts.back() - ts.front()) ==
        doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("beta profile transports along the characteristic relabeling") {
  // smooth compact hump: c0 ~ x^2 (2-x)^2 on [0, 2]
  const auto init = sample_density(uniform_grid(0.0, 2.0, 20001), [](double x) {
    const double v = x * (2.0 - x);
    return v * v;
  });
  cl::Options opt;
  opt.dt = 2e-4;
  cl::Evolver e(init, opt);

  // freeze the initial profile before evolving
  const auto p0 = measures::tail_functions(init);
  const PiecewiseLinear beta0(p0.x, p0.beta);

  e.advance_to(1.0);

  // recompute the evolved beta through the generic profile pipeline
  const double m1 = 1.0;  // placeholder; snapshot carries the real scaling
  (void)m1;
  const double lam = e.lambda();
  const auto snap = e.snapshot(uniform_grid(0.0, 3.0 * lam, 30001));
  const auto pt = measures::tail_functions(snap);
  const PiecewiseLinear beta_t(pt.x, pt.beta);

  const auto& h = e.history();
  int checked = 0;
  for (double x = 0.05; x < 1.2; x += 0.05) {
    const double u = cl::transport_map(h, x, 1.0);
    if (u > 1.9) break;  // stay inside the resolvable support
    CHECK(beta_t(x) == doctest::Approx(beta0(u)).epsilon(1e-3));
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("invariants: monotone Lambda, shape preservation, self-consistency") {
  cl::Options opt;
  opt.dt = 1e-3;
  opt.sample_interval = 0.1;
  cl::Evolver e(SelfSimilarFamily(1.0), opt);
  double prev = e.lambda();
  for (int i = 1; i <= 50; ++i) {
    e.advance_to(5.0 * i / 50.0);
    CHECK(e.lambda() >= prev);
    CHECK(e.self_consistency_residual() < 1e-8);
    CHECK(e.ks_exponential() < 1e-3);  // exponential stays exponential
    prev = e.lambda();
  }

  // shape invariance for a compact member too
  cl::Evolver e2(SelfSimilarFamily(0.5), opt);
  std::vector<double> ks0;
  const auto ref = [&](double u) {
    return SelfSimilarFamily(0.5).survival(u);
  };
  for (int i = 1; i <= 10; ++i) {
    e2.advance_to(0.5 * i);
    const double lam = e2.lambda();
    const double w0 = e2.tail_at(0.0);
    double sup = 0.0;
    for (int k = 0; k <= 400; ++k) {
      const double u = 4.0 * k / 400.0;
      sup = std::max(sup, std::fabs(e2.tail_at(u * lam) / w0 - ref(u)));
    }
    CHECK(sup < 1e-3);
  }
}

TEST_CASE("degenerate input is rejected") {
  GridDensity zero;
  zero.grid = {0.0, 1.0};
  zero.values = {0.0, 0.0};
  CHECK_THROWS(cl::Evolver{zero});
}
