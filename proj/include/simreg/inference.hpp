#ifndef SIMREG_INFERENCE_HPP
#define SIMREG_INFERENCE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "simreg/cox_null.hpp"
#include "simreg/domain.hpp"
#include "simreg/po_null.hpp"
#include "simreg/similarity.hpp"

namespace simreg {

enum class Model { kPh, kPo };
enum class PvaluePath { kEigen, kPerturb, kMoment };

const char* model_name(Model m);
Model parse_model(const std::string& name);
const char* pvalue_path_name(PvaluePath p);
PvaluePath parse_pvalue_path(const std::string& name);

// Q_n = r'Sr / n.
double score_statistic(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& s);

// Plug-in covariance of the normalized kernel score. When built from a
// reduced kernel factor the matrix is rank x rank with the same nonzero
// spectrum as the n x n version.
struct SigmaEstimate {
  Eigen::MatrixXd sigma;
  Eigen::VectorXd eigenvalues;  // nonzero spectrum, descending
  int clipped = 0;              // eigenvalues dropped by the relative cutoff
  bool reduced = false;

  int d() const { return static_cast<int>(eigenvalues.size()); }
};

// Sigma = Psi'Psi / n from influence rows (n x rank). Eigenvalues below
// 1e-8 * max are dropped; negatives beyond tolerance throw.
SigmaEstimate estimate_sigma(const Eigen::MatrixXd& psi, bool reduced = true);

SigmaEstimate estimate_sigma(const NullFitPH& fit, const SurvivalSample& sample,
                             const KernelMatrix& kernel);
// The PO plug-in is off by default; the supported PO path is perturbation.
SigmaEstimate estimate_sigma(const NullFitPO& fit, const SurvivalSample& sample,
                             const KernelMatrix& kernel,
                             bool allow_po_plugin = false);

// Monte Carlo tail of the estimated weighted chi-square null law,
// add-one smoothed: (1 + #{draws >= Q}) / (1 + B). B >= 100.
double pvalue_eigen(double q, const SigmaEstimate& sigma, int b_draws,
                    std::uint64_t seed);

// Perturbation: null draws ||n^{-1/2} sum_i Z_ib psi_i||^2 with per-subject
// standard normal multipliers. Same smoothing and B contract.
double pvalue_perturb(const Eigen::MatrixXd& psi, double q, int b_draws,
                      std::uint64_t seed);

// Analytic three-moment tail (no randomness).
double pvalue_moment(double q, const SigmaEstimate& sigma);

struct TestConfig {
  Model model = Model::kPh;
  WeightScheme scheme = WeightScheme::maf_pow_neg34();
  KernelKind kernel_kind = KernelKind::kIbs;
  CodingMode coding = CodingMode::kAdditive;
  bool kernel_on_coded = false;  // default: kernel from raw counts
  std::optional<PvaluePath> path;  // default: eigen for PH, perturb for PO
  int resamples = 10000;
  std::uint64_t seed = 1;

  PvaluePath effective_path() const {
    if (path) return *path;
    return model == Model::kPh ? PvaluePath::kEigen : PvaluePath::kPerturb;
  }
};

struct TestResult {
  std::string gene;
  double q = 0;
  Eigen::VectorXd eigenvalues;  // eigen path only
  double p_value = 1.0;
  std::string method;       // simreg_ph | simreg_po
  std::string pvalue_path;  // eigen | perturb | moment
  int resamples = 0;
  std::uint64_t seed = 0;
  std::string kernel_kind;
  std::string weight_scheme;
  int n_snps = 0;           // polymorphic SNPs in the kernel
  bool valid = true;
  std::string reason;       // set when !valid
};

// Runs gene-level tests over a joined dataset. Null fits are computed once
// per model and shared across genes (they do not depend on the kernel).
class GeneTestRunner {
 public:
  explicit GeneTestRunner(const Dataset& dataset);

  TestResult run(const std::string& gene, const TestConfig& config) const;
  const NullFitPH& ph_fit() const;
  const NullFitPO& po_fit() const;

 private:
  const Dataset& dataset_;
  mutable std::shared_ptr<const NullFitPH> ph_;
  mutable std::shared_ptr<const NullFitPO> po_;
};

}  // namespace simreg

#endif
