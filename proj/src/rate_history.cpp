#include "cplab/rate_history.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cp {

RateHistory::RateHistory(std::vector<double> times, std::vector<double> lambdas)
    : t_(std::move(times)), lam_(std::move(lambdas)) {
  if (t_.size() != lam_.size() || t_.empty()) {
    throw std::invalid_argument("RateHistory: need matching nonempty arrays");
  }
  if (t_.front() < 0.0) throw std::invalid_argument("RateHistory: negative time");
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (!std::isfinite(t_[i]) || !std::isfinite(lam_[i]) || lam_[i] <= 0.0) {
      throw std::invalid_argument("RateHistory: samples must be finite, Lambda > 0");
    }
    if (i > 0 && !(t_[i] > t_[i - 1])) {
      throw std::invalid_argument("RateHistory: times must be strictly increasing");
    }
  }
}

RateHistory RateHistory::constant(double lambda, double t_begin, double t_end) {
  return RateHistory({t_begin, t_end}, {lambda, lambda});
}

void RateHistory::extend(double t, double lambda) {
  if (!std::isfinite(t) || !std::isfinite(lambda) || lambda <= 0.0) {
    throw std::invalid_argument("RateHistory::extend: bad sample");
  }
  if (!t_.empty() && !(t > t_.back())) {
    throw std::invalid_argument("RateHistory::extend: time must increase");
  }
  if (t_.empty() && t < 0.0) throw std::invalid_argument("RateHistory: negative time");
  t_.push_back(t);
  lam_.push_back(lambda);
}

double RateHistory::t_front() const {
  if (empty()) throw std::logic_error("RateHistory: empty");
  return t_.front();
}

double RateHistory::t_back() const {
  if (empty()) throw std::logic_error("RateHistory: empty");
  return t_.back();
}

double RateHistory::lambda_front() const {
  if (empty()) throw std::logic_error("RateHistory: empty");
  return lam_.front();
}

double RateHistory::lambda_back() const {
  if (empty()) throw std::logic_error("RateHistory: empty");
  return lam_.back();
}

void RateHistory::check_range(double t) const {
  if (empty()) throw std::logic_error("RateHistory: empty");
  const double slack = 1e-12 * (1.0 + std::fabs(t));
  if (t < t_.front() - slack || t > t_.back() + slack) {
    throw std::out_of_range("RateHistory: time outside sampled range");
  }
}

std::size_t RateHistory::segment_index(double t) const {
  check_range(t);
  if (t_.size() == 1) return 0;
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - t_.begin());
  if (i == 0) return 0;
  if (i >= t_.size()) return t_.size() - 2;
  return i - 1;
}

double RateHistory::lambda(double t) const {
  check_range(t);
  if (t_.size() == 1) return lam_.front();
  const std::size_t i = segment_index(t);
  const double w = (t - t_[i]) / (t_[i + 1] - t_[i]);
  return lam_[i] + w * (lam_[i + 1] - lam_[i]);
}

double RateHistory::segment_inv_integral(double t0, double l0, double t1,
                                         double l1, double a, double b) {
  if (a == b) return 0.0;
  const double slope = (l1 - l0) / (t1 - t0);
  const double la = l0 + slope * (a - t0);
  const double u = slope * (b - a) / la;
  if (std::fabs(u) < 1e-8) {
    // log1p(u)/u expansion; avoids 1/slope for flat segments
    return (b - a) / la * (1.0 - u * (0.5 - u * (1.0 / 3.0 - 0.25 * u)));
  }
  return (b - a) / la * (std::log1p(u) / u);
}

double RateHistory::inv_lambda_integral(double s, double t) const {
  check_range(s);
  check_range(t);
  if (s == t) return 0.0;
  if (s > t) return -inv_lambda_integral(t, s);
  if (t_.size() == 1) return (t - s) / lam_.front();
  double acc = 0.0;
  std::size_t i = segment_index(s);
  double a = s;
  while (a < t) {
    const double seg_end = (i + 1 < t_.size()) ? t_[i + 1] : t;
    const double b = std::min(seg_end, t);
    const std::size_t j = std::min(i, t_.size() - 2);
    acc += segment_inv_integral(t_[j], lam_[j], t_[j + 1], lam_[j + 1], a, b);
    a = b;
    ++i;
  }
  return acc;
}

}  // namespace cp
