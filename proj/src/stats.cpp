#include "exitflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "exitflow/errors.hpp"

namespace exitflow {

EmpiricalLaw::EmpiricalLaw(Eigen::VectorXd sample, Eigen::VectorXd weights) {
  if (sample.size() == 0) throw EmptySample("EmpiricalLaw: empty sample");
  if (weights.size() == 0)
    weights = Eigen::VectorXd::Constant(sample.size(), 1.0);
  if (weights.size() != sample.size())
    throw Error("EmpiricalLaw: weight/sample length mismatch");

  std::vector<Eigen::Index> order(sample.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return sample[i] < sample[j]; });

  values_.resize(sample.size());
  weights_.resize(sample.size());
  double total = 0.0;
  for (Eigen::Index k = 0; k < sample.size(); ++k) {
    const double v = sample[order[k]];
    const double w = weights[order[k]];
    if (!std::isfinite(v)) throw Error("EmpiricalLaw: non-finite sample value");
    if (!(w >= 0.0)) throw Error("EmpiricalLaw: negative weight");
    values_[k] = v;
    weights_[k] = w;
    total += w;
  }
  if (!(total > 0.0)) throw EmptySample("EmpiricalLaw: zero total weight");
  weights_ /= total;
  for (Eigen::Index k = 0; k < values_.size(); ++k)
    if (values_[k] == 0.0) atom_at_zero_ += weights_[k];
  mean_ = values_.dot(weights_);
  variance_ = (values_.array() - mean_).square().matrix().dot(weights_);
}

double EmpiricalLaw::cdf(double x) const {
  const double* begin = values_.data();
  const double* end = begin + values_.size();
  const Eigen::Index k = std::upper_bound(begin, end, x) - begin;
  double f = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) f += weights_[i];
  return f;
}

double EmpiricalLaw::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("quantile: need p in [0,1]");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    acc += weights_[i];
    if (acc >= p) return values_[i];
  }
  return values_[values_.size() - 1];
}

namespace {

// single merged-breakpoint sweep over both CDFs; accumulates the sup gap and
// the L1 area between them
void cdf_sweep(const EmpiricalLaw& a, const EmpiricalLaw& b, double* ks,
               double* w1) {
  const Eigen::VectorXd& va = a.values();
  const Eigen::VectorXd& vb = b.values();
  Eigen::Index i = 0, j = 0;
  double Fa = 0.0, Fb = 0.0;
  double sup = 0.0, area = 0.0;
  double x_prev = std::min(va[0], vb[0]);
  while (i < va.size() || j < vb.size()) {
    double x;
    if (i >= va.size()) x = vb[j];
    else if (j >= vb.size()) x = va[i];
    else x = std::min(va[i], vb[j]);
    area += std::abs(Fa - Fb) * (x - x_prev);
    while (i < va.size() && va[i] == x) Fa += a.weights()[i++];
    while (j < vb.size() && vb[j] == x) Fb += b.weights()[j++];
    sup = std::max(sup, std::abs(Fa - Fb));
    x_prev = x;
  }
  if (ks) *ks = sup;
  if (w1) *w1 = area;
}

}  // namespace

double ks_distance(const EmpiricalLaw& a, const EmpiricalLaw& b) {
  double ks;
  cdf_sweep(a, b, &ks, nullptr);
  return ks;
}

double wasserstein1(const EmpiricalLaw& a, const EmpiricalLaw& b) {
  double w1;
  cdf_sweep(a, b, nullptr, &w1);
  return w1;
}

}  // namespace exitflow
