#ifndef SIMREG_COX_NULL_HPP
#define SIMREG_COX_NULL_HPP

#include <Eigen/Dense>

#include "simreg/domain.hpp"
#include "simreg/survival_order.hpp"

namespace simreg {

// Null proportional-hazards fit. gamma_hat follows the transformation-model
// sign convention H(T) = gamma'X + error, i.e. it is the negative of the
// conventional Cox log-hazard-ratio coefficient. The subject cumulative
// hazard is breslow(t) * exp(-gamma'X).
struct NullFitPH {
  Eigen::VectorXd gamma_hat;       // K, may be empty
  SurvOrder order;
  Eigen::VectorXd breslow_jump;    // L, Breslow increments at event times
  Eigen::VectorXd breslow_cum;     // L, cumulative baseline hazard
  Eigen::VectorXd rel_risk;        // n, exp(-gamma'X_i)
  Eigen::VectorXd fitted_cumhaz;   // n, breslow(T_i) * rel_risk_i
  Eigen::VectorXd residuals;       // n, martingale residuals
  Eigen::MatrixXd info;            // K x K observed partial-likelihood information
  Eigen::MatrixXd risk_mean;       // L x K risk-set covariate means at event times
  int iterations = 0;
  double grad_norm = 0.0;          // max-norm of the score at the solution

  // Right-continuous baseline cumulative hazard.
  double breslow_at(double t) const;
};

// Newton-Raphson maximum partial likelihood with Breslow tie handling and
// step halving; K = 0 gives the Nelson-Aalen baseline.
NullFitPH fit_cox_null(const SurvivalSample& sample);

// delta_i - breslow(T_i) * exp(-gamma'X_i); sums to zero at the fit.
Eigen::VectorXd martingale_residuals(const NullFitPH& fit,
                                     const SurvivalSample& sample);

// Per-subject influence vectors for the normalized kernel score
// n^{-1/2} sum_i r_i s_i, expressed in the coordinates of a kernel factor:
// root_rows is n x rank with row i = f_i such that f_i'f_j = S_ij (the
// symmetric square root works, as does any exact factor). Row i of the
// result is psi_i; Sigma = Psi'Psi / n.
Eigen::MatrixXd influence_components_ph(const NullFitPH& fit,
                                        const SurvivalSample& sample,
                                        const Eigen::MatrixXd& root_rows);

}  // namespace simreg

#endif
