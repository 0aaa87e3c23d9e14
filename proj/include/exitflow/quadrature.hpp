#ifndef EXITFLOW_QUADRATURE_HPP
#define EXITFLOW_QUADRATURE_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace exitflow {

using ScalarFn = std::function<double(double)>;

struct QuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_depth = 48;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evals = 0;
};

// Adaptive Gauss-Kronrod 7/15 on a finite interval. Nodes are interior, so
// integrands with removable endpoint behavior are never evaluated at a/b.
QuadResult integrate(const ScalarFn& f, double a, double b,
                     const QuadOptions& opt = {});

// Integral over [a,b] where f has a removable singularity (finite limit) at
// one endpoint. The [endpoint, endpoint +/- delta] slice is handled with the
// Richardson-extrapolated limit value and a trapezoid; the rest adaptively.
QuadResult integrate_with_removable_endpoint(const ScalarFn& f, double a,
                                             double b, double singular_end,
                                             double delta,
                                             const QuadOptions& opt = {});

enum class TailVerdict { Convergent, Divergent, Inconclusive };

struct TailResult {
  TailVerdict verdict = TailVerdict::Inconclusive;
  double value = 0.0;            // extrapolated limit when convergent
  double growth_exponent = 0.0;  // fitted log2 increment slope per halving
  std::vector<double> partials;  // partial integrals at each cutoff
};

// Improper integral of f between `interior` and `endpoint` (which may be
// +/-inf, or a finite point approached by cutoff halving). Decides
// convergence from the fitted geometric decay of the window increments.
TailResult improper_integral(const ScalarFn& f, double interior,
                             double endpoint, const QuadOptions& opt = {},
                             int max_windows = 44);

}  // namespace exitflow

#endif
