#include "exitflow/limit_law.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "exitflow/rng.hpp"

namespace exitflow {

namespace {
constexpr Eigen::Index kChunk = 4096;  // one RNG stream per chunk
}

Eigen::VectorXd sample_W(const WLaw& law, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw Error("sample_W: need n >= 1");
  Eigen::VectorXd out(n);
  const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
  for (Eigen::Index c = 0; c < chunks; ++c) {
    Rng rng(seed, static_cast<std::uint64_t>(c));
    const Eigen::Index lo = c * kChunk, hi = std::min(n, lo + kChunk);
    for (Eigen::Index i = lo; i < hi; ++i) {
      const long cnt = rng.poisson(law.lambda);
      double w = 0.0;
      for (long j = 0; j < cnt; ++j) w += rng.exponential(law.lambda);
      out[i] = w;
    }
  }
  return out;
}

double laplace_W(const WLaw& law, double s) {
  if (s < 0.0) throw Error("laplace_W: need s >= 0");
  return std::exp(-law.lambda * s / (law.lambda + s));
}

double laplace_Yt(double gamma, double a_prime0, double x, double t,
                  double s) {
  if (s < 0.0 || t < 0.0) throw Error("laplace_Yt: need s >= 0, t >= 0");
  const double eg = std::exp(gamma * t);
  return std::exp(-x * s * eg / (1.0 + s * a_prime0 / (2.0 * gamma) * (eg - 1.0)));
}

Eigen::VectorXd sample_limit_position(const WLaw& law,
                                      const RescaledFlow& rescaled,
                                      Eigen::Index n, std::uint64_t seed) {
  Eigen::VectorXd w = sample_W(law, n, seed);
  // grid must cover the 0.999-quantile of the drawn sample
  Eigen::VectorXd sorted = w;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const double q999 = sorted[static_cast<Eigen::Index>(0.999 * (n - 1))];
  if (rescaled.y_max() < q999) {
    std::ostringstream os;
    os << "sample_limit_position: grid y_max " << rescaled.y_max()
       << " below required " << q999;
    throw GridTooShort(os.str());
  }
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = rescaled.eval(w[i]);
  return out;
}

}  // namespace exitflow
