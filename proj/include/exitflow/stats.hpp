#ifndef EXITFLOW_STATS_HPP
#define EXITFLOW_STATS_HPP

#include <Eigen/Dense>

namespace exitflow {

// Weighted scalar sample, sorted on construction; the mass sitting exactly at
// zero (absorbed paths, extinction atom) is tracked separately but remains
// part of the CDF.
class EmpiricalLaw {
 public:
  explicit EmpiricalLaw(Eigen::VectorXd sample,
                        Eigen::VectorXd weights = Eigen::VectorXd());

  Eigen::Index size() const { return values_.size(); }
  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  double atom_at_zero() const { return atom_at_zero_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double cdf(double x) const;       // right-continuous F(x) = P[X <= x]
  double quantile(double p) const;  // left-continuous inverse CDF

 private:
  Eigen::VectorXd values_;   // sorted ascending
  Eigen::VectorXd weights_;  // nonnegative, sums to 1
  double atom_at_zero_ = 0.0;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

// sup_x |F_a(x) - F_b(x)|, atoms included
double ks_distance(const EmpiricalLaw& a, const EmpiricalLaw& b);

// int |F_a(x) - F_b(x)| dx, the L1 coupling distance
double wasserstein1(const EmpiricalLaw& a, const EmpiricalLaw& b);

}  // namespace exitflow

#endif
