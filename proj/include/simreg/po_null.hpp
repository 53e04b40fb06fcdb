#ifndef SIMREG_PO_NULL_HPP
#define SIMREG_PO_NULL_HPP

#include <Eigen/Dense>

#include "simreg/domain.hpp"
#include "simreg/survival_order.hpp"

namespace simreg {

// Null proportional-odds fit via unweighted martingale estimating equations:
// the baseline H is the step function solving the pointwise self-consistency
// equation at each event time, and gamma solves the covariate score
// sum_i X_i {delta_i - Lambda(H(T_i) - gamma'X_i)} = 0 with
// Lambda(u) = log(1 + e^u). gamma uses the transformation-model sign
// H(T) = gamma'X + error, matching NullFitPH.
struct NullFitPO {
  Eigen::VectorXd gamma_hat;  // K, may be empty
  SurvOrder order;
  Eigen::VectorXd h_at_events;  // L, nondecreasing; H = -inf before t_1
  Eigen::VectorXd residuals;    // n, weighted residuals (closed form)
  int outer_iterations = 0;
  double gamma_eq_norm = 0.0;     // max-norm of the gamma equation / n
  double baseline_eq_norm = 0.0;  // max residual of the H equations / n

  // H(t) as a right-continuous step function; -infinity before the first
  // event time.
  double h_at(double t) const;
  // omega_i(t) = 1 / (1 + exp(H(t) - gamma'X_i)), the residual weight.
  double omega(double t, const Eigen::VectorXd& x) const;
};

NullFitPO fit_po_null(const SurvivalSample& sample);

// Closed-form weighted residual
//   r_i = delta_i / (1 + e^{e_i}) - e^{e_i} / (1 + e^{e_i}),
// with e_i = H(T_i) - gamma'X_i. Mean-zero asymptotically; the exact-zero
// sum of the PH case does not carry over to the discrete PO fit.
Eigen::VectorXd po_residuals(const NullFitPO& fit, const SurvivalSample& sample);

// Per-subject influence vectors for the kernel score, obtained by exact
// linearization of the discrete estimating system (H jumps + gamma). Same
// conventions as influence_components_ph: root_rows holds kernel factor
// rows, the result holds psi_i in its rows.
Eigen::MatrixXd influence_components_po(const NullFitPO& fit,
                                        const SurvivalSample& sample,
                                        const Eigen::MatrixXd& root_rows);

}  // namespace simreg

#endif
