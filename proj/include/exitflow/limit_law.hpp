#ifndef EXITFLOW_LIMIT_LAW_HPP
#define EXITFLOW_LIMIT_LAW_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "exitflow/flow.hpp"

namespace exitflow {

// Law of the martingale limit W = lim e^{-gamma t} Y_t of the Feller
// branching diffusion: a Poisson(lambda) sum of Expo(lambda) variables with
// lambda = 2 gamma / a'(0). Atom exp(-lambda) at 0, mean 1, variance 1/...
struct WLaw {
  double gamma;
  double a_prime0;
  double lambda;  // 2 gamma / a'(0)

  WLaw(double gamma_, double a_prime0_)
      : gamma(gamma_), a_prime0(a_prime0_), lambda(2.0 * gamma_ / a_prime0_) {
    if (!(lambda > 0.0)) throw Error("WLaw: need gamma, a'(0) > 0");
  }

  double atom() const { return std::exp(-lambda); }
  double mean() const { return 1.0; }
  double variance() const { return a_prime0 / gamma; }
};

// exact draws via the Poisson-exponential representation
Eigen::VectorXd sample_W(const WLaw& law, Eigen::Index n, std::uint64_t seed);

// E e^{-sW} = exp(-lambda s / (lambda + s))
double laplace_W(const WLaw& law, double s);

// E_x e^{-s Y_t} for the Feller diffusion, closed form
double laplace_Yt(double gamma, double a_prime0, double x, double t, double s);

// phi~(W): the limit position law; atom at 0 preserved exactly.
// Throws GridTooShort when the flow grid does not cover the sample's
// 0.999-quantile.
Eigen::VectorXd sample_limit_position(const WLaw& law,
                                      const RescaledFlow& rescaled,
                                      Eigen::Index n, std::uint64_t seed);

}  // namespace exitflow

#endif
