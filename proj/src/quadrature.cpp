#include "exitflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exitflow/errors.hpp"

namespace exitflow {

namespace {

// Kronrod-15 nodes on [0,1] side (symmetric) and weights; the 7-point Gauss
// rule lives on the odd-index nodes plus the center.
const double kGkNodes[8] = {
    0.991455371120812639206854697526, 0.949107912342758524526189684048,
    0.864864423359769072789712788641, 0.741531185599394439863864773281,
    0.586087235467691130294144838259, 0.405845151377397166906606412077,
    0.207784955007898467600689403773, 0.0};
const double kGkWeights[8] = {
    0.022935322010529224963732008059, 0.063092092629978553290700663189,
    0.104790010322250183839876322542, 0.140653259715525918745189590510,
    0.169004726639267902826583426599, 0.190350578064785409913256402421,
    0.204432940075298892414161999234, 0.209482141084727828012999174892};
const double kGWeights[4] = {
    0.129484966168869693270611432679, 0.279705391489276667901467771424,
    0.381830050505118944950369775489, 0.417959183673469387755102040816};

struct Panel {
  double gk;
  double err;
};

Panel gk15(const ScalarFn& f, double a, double b, std::size_t& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    double fv;
    if (i == 7) {
      fv = f(c);
      ++evals;
    } else {
      const double x = h * kGkNodes[i];
      fv = f(c - x) + f(c + x);
      evals += 2;
    }
    resk += kGkWeights[i] * fv;
    if (i % 2 == 1) resg += kGWeights[i / 2] * fv;
  }
  resk *= h;
  resg *= h;
  return {resk, std::abs(resk - resg)};
}

}  // namespace

QuadResult integrate(const ScalarFn& f, double a, double b,
                     const QuadOptions& opt) {
  QuadResult out;
  if (a == b) return out;
  const double total_len = std::abs(b - a);
  struct Item {
    double a, b;
    int depth;
  };
  std::vector<Item> stack{{a, b, 0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const Panel p = gk15(f, it.a, it.b, out.evals);
    if (!std::isfinite(p.gk))
      throw SingularIntegrand("integrate: non-finite integrand panel");
    const double frac = std::abs(it.b - it.a) / total_len;
    const double tol =
        std::max(opt.abs_tol * frac, opt.rel_tol * std::abs(p.gk));
    if (p.err <= tol || it.depth >= opt.max_depth) {
      out.value += p.gk;
      out.error += p.err;
    } else {
      const double m = 0.5 * (it.a + it.b);
      stack.push_back({it.a, m, it.depth + 1});
      stack.push_back({m, it.b, it.depth + 1});
    }
  }
  return out;
}

QuadResult integrate_with_removable_endpoint(const ScalarFn& f, double a,
                                             double b, double singular_end,
                                             double delta,
                                             const QuadOptions& opt) {
  const bool at_a = std::abs(singular_end - a) < std::abs(singular_end - b);
  const double sgn = at_a ? 1.0 : -1.0;
  const double e = at_a ? a : b;
  // endpoint limit by linear Richardson extrapolation
  const double g1 = f(e + sgn * delta);
  const double g2 = f(e + sgn * 2.0 * delta);
  const double g0 = 2.0 * g1 - g2;
  const double slice = delta * 0.5 * (g0 + g1);

  QuadResult rest = at_a ? integrate(f, a + delta, b, opt)
                         : integrate(f, a, b - delta, opt);
  rest.value += slice;
  rest.evals += 2;
  return rest;
}

TailResult improper_integral(const ScalarFn& f, double interior,
                             double endpoint, const QuadOptions& opt,
                             int max_windows) {
  TailResult out;
  const bool infinite = std::isinf(endpoint);
  QuadOptions wopt = opt;
  wopt.max_depth = 30;

  auto cutoff = [&](int k) -> double {
    if (infinite) return interior * std::pow(2.0, k);
    return endpoint + (interior - endpoint) * std::pow(2.0, -k);
  };

  double total = 0.0;
  std::vector<double> incr;  // signed window integrals (lower -> upper)
  bool overflowed = false;
  for (int k = 0; k < max_windows; ++k) {
    const double c0 = cutoff(k);
    const double c1 = cutoff(k + 1);
    double dI;
    try {
      if (infinite) {
        ScalarFn g = [&f](double u) { return f(std::exp(u)) * std::exp(u); };
        dI = integrate(g, std::log(c0), std::log(c1), wopt).value;
      } else {
        dI = integrate(f, std::min(c0, c1), std::max(c0, c1), wopt).value;
      }
    } catch (const SingularIntegrand&) {
      overflowed = true;
      break;
    }
    if (!std::isfinite(dI) || std::abs(dI) > 1e280) {
      overflowed = true;
      break;
    }
    total += dI;
    incr.push_back(dI);
    out.partials.push_back(total);

    const double floor = opt.abs_tol + opt.rel_tol * std::abs(total);
    if (incr.size() >= 2 && std::abs(incr.back()) < floor &&
        std::abs(incr[incr.size() - 2]) < floor) {
      out.verdict = TailVerdict::Convergent;
      out.value = total;
      out.growth_exponent = -std::numeric_limits<double>::infinity();
      return out;
    }
  }

  if (overflowed) {
    out.verdict = TailVerdict::Divergent;
    out.growth_exponent = std::numeric_limits<double>::infinity();
    return out;
  }

  const int n = static_cast<int>(incr.size());
  const int m = std::min(6, n);
  if (m < 3) {
    out.verdict = TailVerdict::Inconclusive;
    out.value = total;
    return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = n - m; i < n; ++i) {
    const double mag = std::abs(incr[i]);
    if (mag <= 0.0) continue;
    const double x = i, y = std::log2(mag);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 3) {
    out.verdict = TailVerdict::Convergent;
    out.value = total;
    return out;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  out.growth_exponent = slope;

  if (slope < -0.1) {
    const double rho = std::pow(2.0, slope);
    out.verdict = TailVerdict::Convergent;
    out.value = total + incr.back() * rho / (1.0 - rho);
    return out;
  }
  if (slope > 0.1) {
    out.verdict = TailVerdict::Divergent;
    return out;
  }
  // indeterminacy band: harmonic-type divergence keeps constant increments
  if (std::abs(incr.back()) >= 0.9 * std::abs(incr[n - m])) {
    out.verdict = TailVerdict::Divergent;
  } else {
    out.verdict = TailVerdict::Inconclusive;
    out.value = total;
  }
  return out;
}

}  // namespace exitflow
