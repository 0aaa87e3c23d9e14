#include "exitflow/interp.hpp"

#include <algorithm>
#include <cmath>

#include "exitflow/errors.hpp"

namespace exitflow {

PchipInterpolant::PchipInterpolant(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y)
    : x_(x), y_(y) {
  const Eigen::Index n = x.size();
  if (n < 2 || y.size() != n)
    throw Error("PchipInterpolant: need >= 2 nodes and matching sizes");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1]))
      throw Error("PchipInterpolant: abscissae must be strictly increasing");

  Eigen::VectorXd h(n - 1), delta(n - 1);
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  d_.resize(n);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  // interior slopes: weighted harmonic mean where secants agree in sign
  for (Eigen::Index i = 1; i < n - 1; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // one-sided ends (shape-preserving clamp)
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0)
      d = 0.0;
    else if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0))
      d = 3.0 * d0;
    return d;
  };
  d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

Eigen::Index PchipInterpolant::segment(double xq) const {
  const Eigen::Index n = x_.size();
  const double* begin = x_.data();
  const double* it = std::upper_bound(begin, begin + n, xq);
  Eigen::Index i = it - begin - 1;
  return std::clamp<Eigen::Index>(i, 0, n - 2);
}

double PchipInterpolant::operator()(double xq) const {
  const Eigen::Index i = segment(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double PchipInterpolant::derivative(double xq) const {
  const Eigen::Index i = segment(xq);
  const double h = x_[i + 1] - x_[i];
  const double t = (xq - x_[i]) / h;
  const double t2 = t * t;
  const double dh00 = (6 * t2 - 6 * t) / h;
  const double dh10 = 3 * t2 - 4 * t + 1;
  const double dh01 = (-6 * t2 + 6 * t) / h;
  const double dh11 = 3 * t2 - 2 * t;
  return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

}  // namespace exitflow
