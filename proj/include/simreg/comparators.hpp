#ifndef SIMREG_COMPARATORS_HPP
#define SIMREG_COMPARATORS_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "simreg/domain.hpp"

namespace simreg {

// Per-SNP Wald test from a Cox fit with the coded SNP plus covariates.
struct SnpCoxResult {
  std::vector<std::string> snp_ids;
  std::vector<double> p_values;   // 1.0 for degenerate columns, NaN when flagged
  std::vector<bool> degenerate;   // coded column constant
  std::vector<bool> failed;       // separation / non-convergence
};

SnpCoxResult single_snp_cox(const Dataset& dataset, const std::string& gene,
                            CodingMode mode);

// Effective number of independent tests from the correlation matrix of the
// coded columns: 1 for the first locus, then sqrt(1 - max |r| with any
// preceding locus) per additional locus. Bounded by [1, M]; equals 1 + eps
// for duplicated loci and approaches M for independent ones.
double k_eff(const Eigen::MatrixXd& coded);

struct MinPResult {
  std::vector<double> p_values;
  double p_min = 1.0;
  double keff = 1.0;
  double adjusted = 1.0;  // 1 - (1 - p_min)^keff
  int n_snps = 0;
};

MinPResult minp_adjusted(const std::vector<double>& p_values, double keff);

// Full gene-level minP: per-SNP Wald p-values, K_eff on the coded columns,
// Sidak-style adjustment.
MinPResult minp_gene_test(const Dataset& dataset, const std::string& gene,
                          CodingMode mode);

}  // namespace simreg

#endif
