#pragma once

#include <functional>
#include <vector>

namespace cp::halfline {

// Node layout for the wall problem: uniform boundary-layer spacing near the
// origin, geometric growth outward, appended (never moved) when the run
// needs more room. Keeping old nodes fixed keeps mass accounting exact
// across extensions.
struct Grid {
  std::vector<double> x;

  static Grid build(double layer_spacing, double layer_width, double growth,
                    double h_cap, double x_max);
  void extend(double x_max_new, double h_cap, double growth);

  std::size_t size() const { return x.size(); }
  double x_max() const { return x.back(); }
};

// Conservative drift-diffusion step on a fixed grid:
//   dc/dt = d/dx[ v(x) c ] + (eps/2) d2c/dx2
// with a Dirichlet value at x = 0 and zero flux at the right end. Face
// fluxes use exponential fitting (Scharfetter-Gummel weights), which reduces
// to drift-sign upwinding at large cell Peclet number and to centered
// differences at small, and is exact for exponential steady layers.
class StepWorkspace {
 public:
  explicit StepWorkspace(std::size_t n);

  // One theta-weighted step: writes c_new given c_old; face_drift supplies
  // v at face midpoints. Returns the theta-averaged flux through every face,
  // with [0] the wall flux (the absorption rate).
  void step(const std::vector<double>& x, const std::vector<double>& c_old,
            double dt, double theta, double eps,
            const std::function<double(double)>& face_drift, double left_bc,
            std::vector<double>& c_new);

  const std::vector<double>& face_flux() const { return face_flux_; }
  double wall_flux() const { return face_flux_.front(); }

  // theta-averaged drift sum  -x1*H(1/2) - sum_f h_f H_f : the exact rate of
  // change of the trapezoidal first moment under this step
  double first_moment_drift(const std::vector<double>& x) const;

 private:
  std::vector<double> lower_, diag_, upper_, rhs_, af_, bf_, face_flux_, tmp_;
};

// Dual-cell trapezoid weights of a grid (mass quadrature consistent with the
// conservative update).
std::vector<double> dual_cell_weights(const std::vector<double>& x);

double bernoulli(double p);  // p/(e^p - 1), stable near zero

}  // namespace cp::halfline
