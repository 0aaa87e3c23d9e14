#ifndef EXITFLOW_INTERP_HPP
#define EXITFLOW_INTERP_HPP

#include <Eigen/Dense>

namespace exitflow {

// Shape-preserving monotone cubic interpolant (Fritsch-Carlson slopes).
// Monotone data stays monotone, which keeps tabulated flows invertible.
class PchipInterpolant {
 public:
  PchipInterpolant() = default;
  PchipInterpolant(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

  double operator()(double xq) const;
  double derivative(double xq) const;

  double x_min() const { return x_.size() ? x_[0] : 0.0; }
  double x_max() const { return x_.size() ? x_[x_.size() - 1] : 0.0; }
  bool empty() const { return x_.size() == 0; }

 private:
  Eigen::Index segment(double xq) const;
  Eigen::VectorXd x_, y_, d_;  // nodes, values, node derivatives
};

}  // namespace exitflow

#endif
