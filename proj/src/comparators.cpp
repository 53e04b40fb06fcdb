#include "simreg/comparators.hpp"

#include <cmath>
#include <limits>

#include "simreg/cox_null.hpp"
#include "simreg/errors.hpp"

namespace simreg {

namespace {

double wald_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace

SnpCoxResult single_snp_cox(const Dataset& dataset, const std::string& gene,
                            CodingMode mode) {
  auto it = dataset.gene_columns.find(gene);
  if (it == dataset.gene_columns.end())
    throw DataError("gene not resolved in panel: " + gene);
  const auto& cols = it->second;
  const int n = dataset.n();
  const int k_cov = dataset.sample.k();

  SnpCoxResult out;
  for (int col : cols) {
    out.snp_ids.push_back(dataset.panel.snp_ids[col]);
    Eigen::VectorXd coded =
        code_counts(dataset.panel.counts.col(col), mode).values.col(0);
    if ((coded.array() == coded[0]).all()) {
      out.p_values.push_back(1.0);
      out.degenerate.push_back(true);
      out.failed.push_back(false);
      continue;
    }
    SurvivalSample aug = dataset.sample;
    aug.covariates.conservativeResize(n, k_cov + 1);
    aug.covariates.col(k_cov) = coded;
    aug.covariate_names.push_back("snp");
    try {
      const NullFitPH fit = fit_cox_null(aug);
      const double beta = -fit.gamma_hat[k_cov];
      Eigen::MatrixXd cov = fit.info.inverse();
      const double se = std::sqrt(cov(k_cov, k_cov));
      if (!std::isfinite(se) || se <= 0)
        throw NumericError("unstable Wald standard error");
      out.p_values.push_back(wald_two_sided(beta / se));
      out.degenerate.push_back(false);
      out.failed.push_back(false);
    } catch (const NumericError&) {
      out.p_values.push_back(std::numeric_limits<double>::quiet_NaN());
      out.degenerate.push_back(false);
      out.failed.push_back(true);
    }
  }
  return out;
}

double k_eff(const Eigen::MatrixXd& coded) {
  const int m = static_cast<int>(coded.cols());
  if (m < 1) throw DataError("k_eff needs at least one column");
  const int n = static_cast<int>(coded.rows());

  Eigen::VectorXd mean = coded.colwise().mean();
  Eigen::MatrixXd centered = coded.rowwise() - mean.transpose();
  Eigen::VectorXd sd(m);
  for (int j = 0; j < m; ++j) sd[j] = centered.col(j).norm();

  double keff = 0;
  for (int j = 0; j < m; ++j) {
    if (j == 0) {
      keff += 1.0;
      continue;
    }
    double max_abs_r = 0;
    for (int l = 0; l < j; ++l) {
      if (sd[j] == 0 || sd[l] == 0) continue;  // constant column: no correlation
      const double r = centered.col(j).dot(centered.col(l)) / (sd[j] * sd[l]);
      max_abs_r = std::max(max_abs_r, std::min(std::abs(r), 1.0));
    }
    keff += std::sqrt(1.0 - max_abs_r);
  }
  (void)n;
  return std::min(std::max(keff, 1.0), static_cast<double>(m));
}

MinPResult minp_adjusted(const std::vector<double>& p_values, double keff) {
  if (p_values.empty()) throw DataError("minp needs at least one p-value");
  MinPResult out;
  out.p_values = p_values;
  out.keff = keff;
  out.n_snps = static_cast<int>(p_values.size());
  out.p_min = 1.0;
  for (double p : p_values) {
    if (std::isnan(p)) continue;  // flagged fits carry no information
    if (p < 0.0 || p > 1.0) throw DataError("minp p-values must lie in [0, 1]");
    out.p_min = std::min(out.p_min, p);
  }
  // 1 - (1 - p)^k, computed via expm1/log1p for small p.
  out.adjusted = -std::expm1(keff * std::log1p(-out.p_min));
  return out;
}

MinPResult minp_gene_test(const Dataset& dataset, const std::string& gene,
                          CodingMode mode) {
  const SnpCoxResult snp = single_snp_cox(dataset, gene, mode);
  auto it = dataset.gene_columns.find(gene);
  const auto& cols = it->second;
  Eigen::MatrixXd coded(dataset.n(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    coded.col(j) =
        code_counts(dataset.panel.counts.col(cols[j]), mode).values.col(0);
  return minp_adjusted(snp.p_values, k_eff(coded));
}

}  // namespace simreg
