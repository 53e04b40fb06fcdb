#include "simreg/po_null.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "simreg/errors.hpp"

namespace simreg {

namespace {

double log1pexp(double u) {
  if (u > 33.0) return u;
  if (u < -33.0) return std::exp(u);
  return std::log1p(std::exp(u));
}

double sigmoid(double u) {
  if (u >= 0) {
    const double e = std::exp(-u);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// Solves the self-consistency equation for the jump at one event time:
//   sum_{i in R} [Lambda(h - eta_i) - Lambda(h_prev - eta_i)] = d,
// where eta_i = gamma'X_i and Lambda = log1pexp. Increasing and convex in h,
// so Newton from the left bracket converges; a bisection bracket guards the
// first overshooting step.
double solve_jump(const std::vector<double>& eta_risk, double h_prev, int d,
                  double init) {
  double target = d;
  const bool first = !std::isfinite(h_prev);
  auto value = [&](double h) {
    double s = 0;
    for (double e : eta_risk)
      s += log1pexp(h - e) - (first ? 0.0 : log1pexp(h_prev - e));
    return s - target;
  };
  auto slope = [&](double h) {
    double s = 0;
    for (double e : eta_risk) s += sigmoid(h - e);
    return s;
  };

  double lo = first ? init - 40.0 : h_prev;
  double hi = std::max(init, first ? init : h_prev + 1e-8);
  double fhi = value(hi);
  int guard = 0;
  while (fhi < 0) {
    hi += std::max(1.0, hi - lo);
    fhi = value(hi);
    if (++guard > 200) throw NumericError("PO baseline bracket expansion failed");
  }

  double h = std::min(std::max(init, lo), hi);
  for (int it = 0; it < 100; ++it) {
    const double f = value(h);
    if (std::abs(f) < 1e-12 * std::max(1.0, target)) return h;
    if (f > 0)
      hi = h;
    else
      lo = h;
    const double sl = slope(h);
    double next = sl > 0 ? h - f / sl : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    h = next;
  }
  return h;
}

}  // namespace

double NullFitPO::h_at(double t) const {
  const auto& times = order.event_times;
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const int k = static_cast<int>(it - times.begin()) - 1;
  return k < 0 ? -std::numeric_limits<double>::infinity() : h_at_events[k];
}

double NullFitPO::omega(double t, const Eigen::VectorXd& x) const {
  const double h = h_at(t);
  if (!std::isfinite(h)) return 1.0;
  return 1.0 - sigmoid(h - gamma_hat.dot(x));
}

namespace {

// Baseline pass: recompute all H_k given gamma. Returns the jump grid.
Eigen::VectorXd baseline_pass(const SurvivalSample& sample, const SurvOrder& ord,
                              const Eigen::VectorXd& eta) {
  const int l = ord.l();
  const int n = sample.n();
  Eigen::VectorXd h(l);
  double h_prev = std::numeric_limits<double>::infinity() * -1.0;
  for (int k = 0; k < l; ++k) {
    std::vector<double> eta_risk;
    eta_risk.reserve(n - ord.risk_begin[k]);
    for (int pos = ord.risk_begin[k]; pos < n; ++pos)
      eta_risk.push_back(eta[ord.sorted[pos]]);

    double init;
    const double mean_eta =
        std::accumulate(eta_risk.begin(), eta_risk.end(), 0.0) / eta_risk.size();
    if (k == 0) {
      const double frac = static_cast<double>(ord.event_count[0]) / eta_risk.size();
      init = std::log(std::expm1(frac)) + mean_eta;
    } else {
      double denom = 0;
      for (double e : eta_risk) denom += sigmoid(h_prev - e);
      init = h_prev + ord.event_count[k] / std::max(denom, 1e-12);
    }
    h[k] = solve_jump(eta_risk, h_prev, ord.event_count[k], init);
    h_prev = h[k];
  }
  return h;
}

// Gamma estimating function and its (partial) Jacobian at fixed H.
void gamma_equation(const SurvivalSample& sample, const SurvOrder& ord,
                    const Eigen::VectorXd& h, const Eigen::VectorXd& gamma,
                    Eigen::VectorXd* u, Eigen::MatrixXd* jac) {
  const int n = sample.n();
  const int k_cov = sample.k();
  u->setZero(k_cov);
  if (jac) jac->setZero(k_cov, k_cov);
  for (int i = 0; i < n; ++i) {
    const int k = ord.last_event[i];
    if (k < 0) continue;
    const double e = h[k] - gamma.dot(sample.covariates.row(i));
    const double m = sample.event[i] - log1pexp(e);
    u->noalias() += m * sample.covariates.row(i).transpose();
    if (jac)
      jac->noalias() += sigmoid(e) * sample.covariates.row(i).transpose() *
                        sample.covariates.row(i);
  }
}

double baseline_residual_norm(const SurvivalSample& sample, const SurvOrder& ord,
                              const Eigen::VectorXd& h, const Eigen::VectorXd& eta) {
  const int n = sample.n();
  double worst = 0;
  for (int k = 0; k < ord.l(); ++k) {
    double s = 0;
    for (int pos = ord.risk_begin[k]; pos < n; ++pos) {
      const int i = ord.sorted[pos];
      s += log1pexp(h[k] - eta[i]) -
           (k > 0 ? log1pexp(h[k - 1] - eta[i]) : 0.0);
    }
    worst = std::max(worst, std::abs(s - ord.event_count[k]));
  }
  return worst / n;
}

}  // namespace

NullFitPO fit_po_null(const SurvivalSample& sample) {
  const int n = sample.n();
  const int k_cov = sample.k();
  NullFitPO fit;
  fit.order = make_order(sample);
  const SurvOrder& ord = fit.order;

  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(k_cov);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd h = baseline_pass(sample, ord, eta);

  constexpr int kMaxOuter = 100;
  constexpr double kTol = 1e-6;
  int outer = 0;
  if (k_cov > 0) {
    Eigen::VectorXd u(k_cov);
    Eigen::MatrixXd jac(k_cov, k_cov);
    double prev_norm = std::numeric_limits<double>::infinity();
    for (outer = 1; outer <= kMaxOuter; ++outer) {
      gamma_equation(sample, ord, h, gamma, &u, &jac);
      const double norm = u.lpNorm<Eigen::Infinity>() / n;
      if (norm <= kTol) break;

      Eigen::LDLT<Eigen::MatrixXd> ldlt(jac);
      if (ldlt.info() != Eigen::Success)
        throw NumericError("singular PO gamma Jacobian");
      Eigen::VectorXd step = ldlt.solve(u);
      double scale = 1.0;
      // Profile effects can make the full step overshoot; halve until the
      // equation norm decreases.
      Eigen::VectorXd gamma_try, eta_try, h_try, u_try;
      for (int halving = 0; halving < 25; ++halving) {
        gamma_try = gamma + scale * step;
        eta_try = sample.covariates * gamma_try;
        h_try = baseline_pass(sample, ord, eta_try);
        gamma_equation(sample, ord, h_try, gamma_try, &u_try, nullptr);
        if (u_try.lpNorm<Eigen::Infinity>() / n < norm) break;
        scale *= 0.5;
      }
      gamma = gamma_try;
      eta = eta_try;
      h = h_try;
      if (gamma.lpNorm<Eigen::Infinity>() > 30.0)
        throw NumericError("PO gamma step diverged");
      prev_norm = norm;
      if (outer == kMaxOuter) {
        gamma_equation(sample, ord, h, gamma, &u, nullptr);
        if (u.lpNorm<Eigen::Infinity>() / n > kTol)
          throw NumericError("PO fit did not converge in " +
                             std::to_string(kMaxOuter) + " outer iterations; " +
                             "gamma equation norm " + std::to_string(prev_norm));
      }
    }
    gamma_equation(sample, ord, h, gamma, &u, nullptr);
    fit.gamma_eq_norm = u.lpNorm<Eigen::Infinity>() / n;
  }

  fit.gamma_hat = gamma;
  fit.h_at_events = h;
  fit.outer_iterations = outer;
  fit.baseline_eq_norm = baseline_residual_norm(sample, ord, h, eta);
  fit.residuals = po_residuals(fit, sample);
  return fit;
}

Eigen::VectorXd po_residuals(const NullFitPO& fit, const SurvivalSample& sample) {
  const int n = sample.n();
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) {
    const int k = fit.order.last_event[i];
    if (k < 0) {
      r[i] = sample.event[i];  // censored before the first event: 0
      continue;
    }
    const double e = fit.h_at_events[k] -
                     (sample.k() > 0 ? fit.gamma_hat.dot(sample.covariates.row(i)) : 0.0);
    const double s = sigmoid(e);
    r[i] = sample.event[i] * (1.0 - s) - s;
  }
  return r;
}

Eigen::MatrixXd influence_components_po(const NullFitPO& fit,
                                        const SurvivalSample& sample,
                                        const Eigen::MatrixXd& root_rows) {
  const int n = sample.n();
  const int k_cov = sample.k();
  const SurvOrder& ord = fit.order;
  const int l = ord.l();
  const int rank = static_cast<int>(root_rows.cols());
  if (root_rows.rows() != n)
    throw DataError("kernel root row count does not match sample size");

  const Eigen::VectorXd eta =
      k_cov > 0 ? (sample.covariates * fit.gamma_hat).eval()
                : Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd& h = fit.h_at_events;

  // Estimating-system Jacobian. The H block is lower bidiagonal:
  //   T[k][k]   = sum_{R_k} lambda(H_k - eta_i)        (= a_k)
  //   T[k][k-1] = -sum_{R_k} lambda(H_{k-1} - eta_i)   (= -c_k)
  Eigen::VectorXd a = Eigen::VectorXd::Zero(l);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(l);  // c[0] unused
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(l, k_cov);   // dE_k / dgamma'
  Eigen::MatrixXd cg = Eigen::MatrixXd::Zero(k_cov, l);  // dE_gamma / dH_k
  Eigen::MatrixXd d_gg = Eigen::MatrixXd::Zero(k_cov, k_cov);

  for (int k = 0; k < l; ++k) {
    for (int pos = ord.risk_begin[k]; pos < n; ++pos) {
      const int i = ord.sorted[pos];
      const double lam = sigmoid(h[k] - eta[i]);
      const double lam_prev = k > 0 ? sigmoid(h[k - 1] - eta[i]) : 0.0;
      a[k] += lam;
      if (k > 0) c[k] += lam_prev;
      if (k_cov > 0)
        b.row(k).noalias() -= (lam - lam_prev) * sample.covariates.row(i);
    }
  }
  Eigen::VectorXd d_subject(n);   // residual slope -dr_i/de_i
  Eigen::VectorXd lam_end(n);     // lambda at the subject endpoint
  for (int i = 0; i < n; ++i) {
    const int k = ord.last_event[i];
    if (k < 0) {
      d_subject[i] = 0;
      lam_end[i] = 0;
      continue;
    }
    const double s = sigmoid(h[k] - eta[i]);
    lam_end[i] = s;
    d_subject[i] = (1.0 + sample.event[i]) * s * (1.0 - s);
    if (k_cov > 0)
      cg.col(k).noalias() -= s * sample.covariates.row(i).transpose();
    if (k_cov > 0)
      d_gg.noalias() += s * sample.covariates.row(i).transpose() *
                        sample.covariates.row(i);
  }

  // Sensitivity of the score vector sum_j r_j f_j to (H, gamma).
  Eigen::MatrixXd g_h = Eigen::MatrixXd::Zero(rank, l);
  Eigen::MatrixXd g_gamma = Eigen::MatrixXd::Zero(rank, k_cov);
  for (int i = 0; i < n; ++i) {
    const int k = ord.last_event[i];
    if (k < 0) continue;
    g_h.col(k).noalias() -= d_subject[i] * root_rows.row(i).transpose();
    if (k_cov > 0)
      g_gamma.noalias() +=
          d_subject[i] * root_rows.row(i).transpose() * sample.covariates.row(i);
  }

  // Solve J'W = G' column by column. J' has an upper-bidiagonal H block,
  // so each solve is a back substitution plus a small Schur complement.
  auto solve_transposed = [&](const Eigen::VectorXd& ch,
                              const Eigen::VectorXd& cgam) -> Eigen::VectorXd {
    Eigen::VectorXd y(l);
    auto backsub = [&](const Eigen::VectorXd& rhs, Eigen::VectorXd& out) {
      out[l - 1] = rhs[l - 1] / a[l - 1];
      for (int k = l - 2; k >= 0; --k)
        out[k] = (rhs[k] + c[k + 1] * out[k + 1]) / a[k];
    };
    backsub(ch, y);
    if (k_cov == 0) {
      Eigen::VectorXd w(l);
      w = y;
      return w;
    }
    Eigen::MatrixXd z(l, k_cov);
    Eigen::VectorXd col(l), out(l);
    for (int j = 0; j < k_cov; ++j) {
      col = cg.row(j).transpose();
      backsub(col, out);
      z.col(j) = out;
    }
    const Eigen::MatrixXd schur = d_gg.transpose() - b.transpose() * z;
    Eigen::VectorXd w_gamma =
        schur.fullPivLu().solve(cgam - b.transpose() * y);
    Eigen::VectorXd w(l + k_cov);
    w.head(l) = y - z * w_gamma;
    w.tail(k_cov) = w_gamma;
    return w;
  };

  Eigen::MatrixXd w_all(l + k_cov, rank);
  for (int j = 0; j < rank; ++j) {
    Eigen::VectorXd ch = g_h.row(j).transpose();
    Eigen::VectorXd cgam =
        k_cov > 0 ? g_gamma.row(j).transpose().eval() : Eigen::VectorXd();
    w_all.col(j) = solve_transposed(ch, cgam);
  }

  // Per-subject estimating contributions F_i.
  Eigen::MatrixXd f_all = Eigen::MatrixXd::Zero(l + k_cov, n);
  for (int i = 0; i < n; ++i) {
    const int k_i = ord.last_event[i];
    double lam_prev_cum = 0.0;
    for (int k = 0; k <= k_i; ++k) {
      const double lam_cum = log1pexp(h[k] - eta[i]);
      f_all(k, i) = lam_cum - lam_prev_cum;
      lam_prev_cum = lam_cum;
    }
    if (sample.event[i]) f_all(k_i, i) -= 1.0;
    if (k_cov > 0) {
      const double m = sample.event[i] - (k_i >= 0 ? log1pexp(h[k_i] - eta[i]) : 0.0);
      f_all.block(l, i, k_cov, 1) = m * sample.covariates.row(i).transpose();
    }
  }

  Eigen::MatrixXd psi = fit.residuals.asDiagonal() * root_rows;
  psi.noalias() -= f_all.transpose() * w_all;
  return psi;
}

}  // namespace simreg
