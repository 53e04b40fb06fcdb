#include "simreg/inference.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "simreg/errors.hpp"
#include "simreg/rng.hpp"
#include "simreg/weighted_chisq.hpp"

namespace simreg {

namespace {
constexpr std::uint64_t kEigenSalt = 0xe16e5a17ULL;
constexpr std::uint64_t kPerturbSalt = 0x9e57a1bULL;
constexpr double kEigCutoff = 1e-8;
}  // namespace

const char* model_name(Model m) { return m == Model::kPh ? "ph" : "po"; }

Model parse_model(const std::string& name) {
  if (name == "ph") return Model::kPh;
  if (name == "po") return Model::kPo;
  throw DataError("unknown model: " + name);
}

const char* pvalue_path_name(PvaluePath p) {
  switch (p) {
    case PvaluePath::kEigen: return "eigen";
    case PvaluePath::kPerturb: return "perturb";
    case PvaluePath::kMoment: return "moment";
  }
  return "?";
}

PvaluePath parse_pvalue_path(const std::string& name) {
  if (name == "eigen") return PvaluePath::kEigen;
  if (name == "perturb") return PvaluePath::kPerturb;
  if (name == "moment") return PvaluePath::kMoment;
  throw DataError("unknown p-value path: " + name);
}

double score_statistic(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& s) {
  if (residuals.size() != s.rows() || s.rows() != s.cols())
    throw DataError("score_statistic: dimension mismatch");
  const int n = static_cast<int>(residuals.size());
  return residuals.dot(s * residuals) / n;
}

SigmaEstimate estimate_sigma(const Eigen::MatrixXd& psi, bool reduced) {
  const int n = static_cast<int>(psi.rows());
  SigmaEstimate out;
  out.reduced = reduced;
  out.sigma = psi.transpose() * psi / n;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.sigma);
  if (es.info() != Eigen::Success)
    throw NumericError("eigendecomposition failed in estimate_sigma");
  Eigen::VectorXd ev = es.eigenvalues();
  const double max_ev = ev.size() > 0 ? ev.maxCoeff() : 0.0;
  if (ev.size() > 0 && ev.minCoeff() < -kEigCutoff * std::max(max_ev, 1e-300))
    throw NumericError("influence covariance is not PSD; formula bug suspected");

  std::vector<double> kept;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > kEigCutoff * max_ev && ev[i] > 0) kept.push_back(ev[i]);
  std::sort(kept.begin(), kept.end(), std::greater<double>());
  out.clipped = static_cast<int>(ev.size() - kept.size());
  out.eigenvalues = Eigen::Map<Eigen::VectorXd>(kept.data(), kept.size());
  return out;
}

SigmaEstimate estimate_sigma(const NullFitPH& fit, const SurvivalSample& sample,
                             const KernelMatrix& kernel) {
  return estimate_sigma(influence_components_ph(fit, sample, kernel.factor), true);
}

SigmaEstimate estimate_sigma(const NullFitPO& fit, const SurvivalSample& sample,
                             const KernelMatrix& kernel, bool allow_po_plugin) {
  if (!allow_po_plugin)
    throw NumericError(
        "PO plug-in Sigma is optional and disabled; use the perturbation "
        "p-value path or pass allow_po_plugin = true");
  return estimate_sigma(influence_components_po(fit, sample, kernel.factor), true);
}

double pvalue_eigen(double q, const SigmaEstimate& sigma, int b_draws,
                    std::uint64_t seed) {
  if (b_draws < 100) throw DataError("eigen path needs B >= 100 resamples");
  if (sigma.d() == 0) return 1.0;  // degenerate null law: point mass at 0
  const std::uint64_t base = mix_seed(seed, kEigenSalt);
  const Eigen::VectorXd& xi = sigma.eigenvalues;
  long exceed = 0;
  for (int b = 0; b < b_draws; ++b) {
    Rng rng(base, static_cast<std::uint64_t>(b));
    double draw = 0;
    for (int k = 0; k < xi.size(); ++k) {
      const double z = rng.next_normal();
      draw += xi[k] * z * z;
    }
    if (draw >= q) ++exceed;
  }
  return (1.0 + exceed) / (1.0 + b_draws);
}

double pvalue_perturb(const Eigen::MatrixXd& psi, double q, int b_draws,
                      std::uint64_t seed) {
  if (b_draws < 100) throw DataError("perturbation path needs B >= 100 resamples");
  const int n = static_cast<int>(psi.rows());
  const std::uint64_t base = mix_seed(seed, kPerturbSalt);
  long exceed = 0;
  Eigen::VectorXd z(n);
  for (int b = 0; b < b_draws; ++b) {
    Rng rng(base, static_cast<std::uint64_t>(b));
    for (int i = 0; i < n; ++i) z[i] = rng.next_normal();
    const double draw = (psi.transpose() * z).squaredNorm() / n;
    if (draw >= q) ++exceed;
  }
  return (1.0 + exceed) / (1.0 + b_draws);
}

double pvalue_moment(double q, const SigmaEstimate& sigma) {
  if (sigma.d() == 0) return 1.0;
  WeightedChiSq dist(sigma.eigenvalues);
  return wchisq_tail_moment_match(dist, q);
}

GeneTestRunner::GeneTestRunner(const Dataset& dataset) : dataset_(dataset) {}

const NullFitPH& GeneTestRunner::ph_fit() const {
  if (!ph_) ph_ = std::make_shared<const NullFitPH>(fit_cox_null(dataset_.sample));
  return *ph_;
}

const NullFitPO& GeneTestRunner::po_fit() const {
  if (!po_) po_ = std::make_shared<const NullFitPO>(fit_po_null(dataset_.sample));
  return *po_;
}

TestResult GeneTestRunner::run(const std::string& gene,
                               const TestConfig& config) const {
  TestResult res;
  res.gene = gene;
  res.method = config.model == Model::kPh ? "simreg_ph" : "simreg_po";
  res.pvalue_path = pvalue_path_name(config.effective_path());
  res.resamples = config.resamples;
  res.seed = config.seed;
  res.kernel_kind = kernel_name(config.kernel_kind);
  res.weight_scheme = config.scheme.name();

  auto it = dataset_.gene_columns.find(gene);
  if (it == dataset_.gene_columns.end()) {
    res.valid = false;
    res.reason = "no SNPs resolved in panel";
    return res;
  }
  std::vector<int> cols;
  for (int j : it->second)
    if (!dataset_.panel.monomorphic[j]) cols.push_back(j);
  res.n_snps = static_cast<int>(cols.size());
  if (cols.empty()) {
    res.valid = false;
    res.reason = "all SNPs monomorphic";
    return res;
  }

  const int n = dataset_.n();
  Eigen::MatrixXd values(n, cols.size());
  Eigen::VectorXd maf(cols.size());
  std::vector<std::string> snp_ids;
  bool binary = false;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    maf[j] = dataset_.panel.maf[cols[j]];
    snp_ids.push_back(dataset_.panel.snp_ids[cols[j]]);
  }
  if (config.kernel_on_coded && config.coding != CodingMode::kAdditive) {
    Eigen::MatrixXi sub(n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
      sub.col(j) = dataset_.panel.counts.col(cols[j]);
    values = code_counts(sub, config.coding).values;
    binary = true;
  } else {
    for (std::size_t j = 0; j < cols.size(); ++j)
      values.col(j) = dataset_.panel.counts.col(cols[j]).cast<double>();
  }

  const Eigen::VectorXd w = weights(maf, config.scheme);
  const KernelMatrix k = kernel(values, binary, w, config.kernel_kind, snp_ids);

  const PvaluePath path = config.effective_path();
  if (config.model == Model::kPh) {
    const NullFitPH& fit = ph_fit();
    res.q = score_statistic(fit.residuals, k.S);
    if (path == PvaluePath::kPerturb) {
      const Eigen::MatrixXd psi = influence_components_ph(fit, dataset_.sample, k.factor);
      res.p_value = pvalue_perturb(psi, res.q, config.resamples, config.seed);
    } else {
      const SigmaEstimate sig = estimate_sigma(fit, dataset_.sample, k);
      res.eigenvalues = sig.eigenvalues;
      res.p_value = path == PvaluePath::kEigen
                        ? pvalue_eigen(res.q, sig, config.resamples, config.seed)
                        : pvalue_moment(res.q, sig);
    }
  } else {
    const NullFitPO& fit = po_fit();
    res.q = score_statistic(fit.residuals, k.S);
    if (path == PvaluePath::kPerturb) {
      const Eigen::MatrixXd psi = influence_components_po(fit, dataset_.sample, k.factor);
      res.p_value = pvalue_perturb(psi, res.q, config.resamples, config.seed);
    } else {
      const SigmaEstimate sig = estimate_sigma(fit, dataset_.sample, k, true);
      res.eigenvalues = sig.eigenvalues;
      res.p_value = path == PvaluePath::kEigen
                        ? pvalue_eigen(res.q, sig, config.resamples, config.seed)
                        : pvalue_moment(res.q, sig);
    }
  }
  if (res.q < -1e-10)
    throw NumericError("negative score statistic; kernel not PSD?");
  return res;
}

}  // namespace simreg
