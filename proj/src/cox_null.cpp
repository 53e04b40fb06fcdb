#include "simreg/cox_null.hpp"

#include <algorithm>
#include <cmath>

#include "simreg/errors.hpp"

namespace simreg {

namespace {

// Risk-set sums at every event time for a given beta (conventional sign,
// beta = -gamma). One reverse sweep over the time-sorted subjects.
struct RiskSums {
  Eigen::VectorXd s0;   // L
  Eigen::MatrixXd s1;   // L x K
  std::vector<Eigen::MatrixXd> s2;  // L of K x K (empty when K == 0)
  double loglik = 0.0;
};

RiskSums risk_sums(const SurvivalSample& sample, const SurvOrder& ord,
                   const Eigen::VectorXd& beta, bool need_s2) {
  const int n = sample.n();
  const int k_cov = sample.k();
  const int l = ord.l();

  Eigen::VectorXd eta = k_cov > 0 ? (sample.covariates * beta).eval()
                                  : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = eta.array().exp();

  RiskSums rs;
  rs.s0.setZero(l);
  rs.s1.setZero(l, k_cov);
  if (need_s2) rs.s2.assign(l, Eigen::MatrixXd::Zero(k_cov, k_cov));

  double run0 = 0;
  Eigen::VectorXd run1 = Eigen::VectorXd::Zero(k_cov);
  Eigen::MatrixXd run2 = Eigen::MatrixXd::Zero(k_cov, k_cov);
  int pos = n - 1;
  for (int k = l - 1; k >= 0; --k) {
    for (; pos >= ord.risk_begin[k]; --pos) {
      const int i = ord.sorted[pos];
      run0 += w[i];
      if (k_cov > 0) {
        run1.noalias() += w[i] * sample.covariates.row(i).transpose();
        if (need_s2)
          run2.noalias() += w[i] * sample.covariates.row(i).transpose() *
                            sample.covariates.row(i);
      }
    }
    rs.s0[k] = run0;
    if (k_cov > 0) rs.s1.row(k) = run1.transpose();
    if (need_s2) rs.s2[k] = run2;
  }

  for (int i = 0; i < n; ++i)
    if (sample.event[i]) rs.loglik += eta[i];
  for (int k = 0; k < l; ++k) rs.loglik -= ord.event_count[k] * std::log(rs.s0[k]);
  return rs;
}

}  // namespace

double NullFitPH::breslow_at(double t) const {
  const auto& times = order.event_times;
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const int k = static_cast<int>(it - times.begin()) - 1;
  return k < 0 ? 0.0 : breslow_cum[k];
}

NullFitPH fit_cox_null(const SurvivalSample& sample) {
  const int n = sample.n();
  const int k_cov = sample.k();
  NullFitPH fit;
  fit.order = make_order(sample);
  const SurvOrder& ord = fit.order;
  const int l = ord.l();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k_cov);
  RiskSums rs = risk_sums(sample, ord, beta, k_cov > 0);

  constexpr int kMaxIter = 50;
  constexpr double kTol = 1e-8;
  if (k_cov > 0) {
    Eigen::VectorXd event_x_sum = Eigen::VectorXd::Zero(k_cov);
    for (int i = 0; i < n; ++i)
      if (sample.event[i]) event_x_sum += sample.covariates.row(i).transpose();

    bool converged = false;
    for (int iter = 1; iter <= kMaxIter; ++iter) {
      Eigen::VectorXd grad = event_x_sum;
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(k_cov, k_cov);
      for (int k = 0; k < l; ++k) {
        const Eigen::VectorXd xbar = rs.s1.row(k).transpose() / rs.s0[k];
        grad -= ord.event_count[k] * xbar;
        hess += ord.event_count[k] * (rs.s2[k] / rs.s0[k] - xbar * xbar.transpose());
      }
      fit.grad_norm = grad.lpNorm<Eigen::Infinity>();
      fit.iterations = iter - 1;
      if (fit.grad_norm <= kTol) {
        converged = true;
        break;
      }

      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw NumericError("singular partial-likelihood information; covariates "
                           "may be collinear on the risk sets");
      Eigen::VectorXd step = ldlt.solve(grad);

      double scale = 1.0;
      RiskSums next;
      for (int halving = 0; halving < 30; ++halving) {
        next = risk_sums(sample, ord, beta + scale * step, true);
        if (next.loglik >= rs.loglik - 1e-12) break;
        scale *= 0.5;
      }
      beta += scale * step;
      rs = std::move(next);
      if (beta.lpNorm<Eigen::Infinity>() > 30.0)
        throw NumericError("Cox step diverged (separation suspected): |beta| > 30");
    }
    if (!converged)
      throw NumericError("Cox Newton did not converge in " +
                         std::to_string(kMaxIter) +
                         " iterations; gradient max-norm " +
                         std::to_string(fit.grad_norm));
  }

  fit.gamma_hat = -beta;
  fit.breslow_jump.resize(l);
  fit.breslow_cum.resize(l);
  double cum = 0;
  for (int k = 0; k < l; ++k) {
    fit.breslow_jump[k] = ord.event_count[k] / rs.s0[k];
    cum += fit.breslow_jump[k];
    fit.breslow_cum[k] = cum;
  }

  fit.rel_risk = k_cov > 0
                     ? (sample.covariates * beta).array().exp().matrix().eval()
                     : Eigen::VectorXd::Ones(n);
  fit.fitted_cumhaz.resize(n);
  fit.residuals.resize(n);
  for (int i = 0; i < n; ++i) {
    const int k = ord.last_event[i];
    fit.fitted_cumhaz[i] = (k < 0 ? 0.0 : fit.breslow_cum[k]) * fit.rel_risk[i];
    fit.residuals[i] = sample.event[i] - fit.fitted_cumhaz[i];
  }

  fit.info.setZero(k_cov, k_cov);
  fit.risk_mean.setZero(l, k_cov);
  if (k_cov > 0) {
    for (int k = 0; k < l; ++k) {
      const Eigen::VectorXd xbar = rs.s1.row(k).transpose() / rs.s0[k];
      fit.risk_mean.row(k) = xbar.transpose();
      fit.info += ord.event_count[k] *
                  (rs.s2[k] / rs.s0[k] - xbar * xbar.transpose());
    }
  }
  return fit;
}

Eigen::VectorXd martingale_residuals(const NullFitPH& fit,
                                     const SurvivalSample& sample) {
  Eigen::VectorXd r(sample.n());
  for (int i = 0; i < sample.n(); ++i)
    r[i] = sample.event[i] - fit.breslow_at(sample.time[i]) * fit.rel_risk[i];
  return r;
}

Eigen::MatrixXd influence_components_ph(const NullFitPH& fit,
                                        const SurvivalSample& sample,
                                        const Eigen::MatrixXd& root_rows) {
  const int n = sample.n();
  const int k_cov = sample.k();
  const SurvOrder& ord = fit.order;
  const int l = ord.l();
  const int rank = static_cast<int>(root_rows.cols());
  if (root_rows.rows() != n)
    throw DataError("kernel root row count does not match sample size");

  // Risk-set means of the factor rows, weighted by exp(beta'X).
  Eigen::MatrixXd sbar(l, rank);  // row k = weighted mean of f_i over R(t_k)
  {
    Eigen::VectorXd runf = Eigen::VectorXd::Zero(rank);
    double run0 = 0;
    int pos = n - 1;
    for (int k = l - 1; k >= 0; --k) {
      for (; pos >= ord.risk_begin[k]; --pos) {
        const int i = ord.sorted[pos];
        runf.noalias() += fit.rel_risk[i] * root_rows.row(i).transpose();
        run0 += fit.rel_risk[i];
      }
      sbar.row(k) = runf.transpose() / run0;
    }
  }

  // Prefix sums over event times of sbar and risk_mean against the
  // Breslow increments.
  Eigen::MatrixXd pf(l, rank);   // P_f(t_k) = sum_{l<=k} sbar_l dLambda_l
  Eigen::MatrixXd px(l, k_cov);  // P_X(t_k)
  {
    Eigen::VectorXd accf = Eigen::VectorXd::Zero(rank);
    Eigen::VectorXd accx = Eigen::VectorXd::Zero(k_cov);
    for (int k = 0; k < l; ++k) {
      accf += fit.breslow_jump[k] * sbar.row(k).transpose();
      pf.row(k) = accf.transpose();
      if (k_cov > 0) {
        accx += fit.breslow_jump[k] * fit.risk_mean.row(k).transpose();
        px.row(k) = accx.transpose();
      }
    }
  }

  Eigen::MatrixXd psi(n, rank);
  Eigen::MatrixXd u;  // n x K martingale integrals of X_i - xbar(t)
  if (k_cov > 0) u.setZero(n, k_cov);

  for (int i = 0; i < n; ++i) {
    const int k = ord.last_event[i];
    Eigen::VectorXd b2 = Eigen::VectorXd::Zero(rank);
    if (k >= 0) {
      b2 = -fit.rel_risk[i] * pf.row(k).transpose();
      if (sample.event[i]) b2 += sbar.row(k).transpose();
    }
    psi.row(i) = fit.residuals[i] * root_rows.row(i) - b2.transpose();

    if (k_cov > 0) {
      Eigen::VectorXd ui = Eigen::VectorXd::Zero(k_cov);
      if (k >= 0) {
        ui = -fit.rel_risk[i] *
             (sample.covariates.row(i).transpose() * fit.breslow_cum[k] -
              px.row(k).transpose());
        if (sample.event[i])
          ui += sample.covariates.row(i).transpose() - fit.risk_mean.row(k).transpose();
      }
      u.row(i) = ui.transpose();
    }
  }

  if (k_cov > 0) {
    // B1 - B2 correction for estimating gamma; A is the information limit.
    Eigen::MatrixXd b1(rank, k_cov), b2m(rank, k_cov);
    b1.setZero();
    b2m.setZero();
    for (int i = 0; i < n; ++i) {
      b1.noalias() += fit.fitted_cumhaz[i] * root_rows.row(i).transpose() *
                      sample.covariates.row(i);
      const int k = ord.last_event[i];
      if (k >= 0)
        b2m.noalias() += fit.rel_risk[i] * root_rows.row(i).transpose() * px.row(k);
    }
    b1 /= n;
    b2m /= n;
    const Eigen::MatrixXd a = fit.info / n;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success)
      throw NumericError("information matrix not invertible in influence computation");
    // psi_i -= (B1 - B2) A^{-1} U_i for every subject at once.
    psi.noalias() -= u * ldlt.solve((b1 - b2m).transpose());
  }
  return psi;
}

}  // namespace simreg
