#ifndef EXITFLOW_BRANCHING_HPP
#define EXITFLOW_BRANCHING_HPP

#include <Eigen/Dense>
#include <string>

#include "exitflow/model.hpp"

namespace exitflow {

// Branching mechanism for the Poincare-Schroeder family: generating function
// p^(s) for Galton-Watson, Psi(s) = p^(s) - s for continuous time, Psi(s)
// for continuous-state processes.
struct BranchingMechanism {
  enum class Kind { GwGeneratingFunction, CtMechanism, CsbMechanism };
  Kind kind;
  ScalarFn psi;       // p^ for GW; Psi otherwise
  double derivative;  // m = p^'(1) for GW; Psi'(1) for ct; Psi'(0) for csb
  std::string name;

  // named families
  static BranchingMechanism binary_splitting();        // ct, Psi = s^2 - s
  static BranchingMechanism feller(double gamma);      // csb, gamma s - s^2/2
  static BranchingMechanism geometric_gw(double u);    // GW, (1-u)/(1-us)
  static BranchingMechanism geometric_ct(double u);    // ct, p^ geometric
  static BranchingMechanism kary_fission(int k);       // ct, s^k - s
};

struct TransformSolution {
  Eigen::VectorXd s;
  Eigen::VectorXd values;
  double residual = 0.0;  // ODE / identity residual diagnostic
};

// s phi'(s) = Psi(phi(s)) / Psi'(1), phi(0) = 1 (singular at 0, started from
// the series stub phi ~ 1 - s). Throws SingularityHit if phi leaves (0, 1].
TransformSolution solve_ct_phi(const BranchingMechanism& mech,
                               const Eigen::VectorXd& s_grid);

// s kappa'(s) = Psi(kappa(s)) / Psi'(0), kappa(0) = 0, kappa'(0+) = 1.
TransformSolution solve_csb_kappa(const BranchingMechanism& mech,
                                  const Eigen::VectorXd& s_grid);

// theta(s) = (1-s) exp(-int_s^1 (Psi'(1)/Psi(u) + 1/(1-u)) du), 0 <= s <= 1
TransformSolution theta_inverse_ct(const BranchingMechanism& mech,
                                   const Eigen::VectorXd& s_grid);

// theta(s) = s exp(int_0^s (Psi'(0)/Psi(u) - 1/u) du), 0 <= s < u* where
// u* > 0 is the first positive zero of Psi (the cap of kappa's range)
TransformSolution theta_inverse_csb(const BranchingMechanism& mech,
                                    const Eigen::VectorXd& s_grid);

// phi by Poincare iteration phi_n(s) = p^{on}(e^{-s/m^n}); pointwise.
double gw_poincare_phi(const BranchingMechanism& mech, double s);

// sup_s |phi(m s) - p^(phi(s))| over the grid, with phi from the iteration.
// Pass m_override to probe detector sanity with a wrong offspring mean.
double schroeder_residual(const BranchingMechanism& mech,
                          const Eigen::VectorXd& s_grid,
                          double m_override = 0.0);

}  // namespace exitflow

#endif
