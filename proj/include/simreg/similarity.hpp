#ifndef SIMREG_SIMILARITY_HPP
#define SIMREG_SIMILARITY_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace simreg {

// Per-SNP weight rule applied to the marker IBS scores.
struct WeightScheme {
  enum Kind {
    kUniform,          // w = 1
    kMafPowNeg34,      // w = q^(-3/4)
    kMafInverse,       // w = q^(-1)
    kOneMinusMafPow24, // w = (1-q)^24
    kCustom,
  };
  Kind kind = kMafPowNeg34;
  Eigen::VectorXd custom;

  static WeightScheme uniform() { return {kUniform, {}}; }
  static WeightScheme maf_pow_neg34() { return {kMafPowNeg34, {}}; }
  static WeightScheme maf_inverse() { return {kMafInverse, {}}; }
  static WeightScheme one_minus_maf_pow24() { return {kOneMinusMafPow24, {}}; }
  static WeightScheme custom_weights(Eigen::VectorXd w) { return {kCustom, std::move(w)}; }
  static WeightScheme parse(const std::string& name);
  const char* name() const;
};

// Strictly positive weights for the given minor allele frequencies.
// Throws on maf <= 0 (monomorphic SNPs must be filtered first).
Eigen::VectorXd weights(const Eigen::VectorXd& maf, const WeightScheme& scheme);

// Marker-level IBS for biallelic dosages in {0,1,2}:
// 2 if equal, 1 if |diff| == 1, 0 if |diff| == 2.
int ibs_marker(int a, int b);

enum class KernelKind { kIbs, kLinear };

const char* kernel_name(KernelKind kind);
KernelKind parse_kernel(const std::string& name);

// n x n genetic similarity matrix with the exact low-rank factor that
// produced it: S = factor * factor^T. The factor (width <= 3 per SNP)
// is what the inference machinery works in, so no n x n decomposition is
// ever needed on the hot path.
struct KernelMatrix {
  Eigen::MatrixXd S;
  Eigen::MatrixXd factor;  // n x rank
  KernelKind kind = KernelKind::kIbs;
  Eigen::VectorXd w;
  std::vector<std::string> snp_ids;

  int n() const { return static_cast<int>(S.rows()); }
  double diag_target() const { return 2.0 * w.sum(); }
};

// Builds the kernel from a value matrix: minor-allele counts {0,1,2}
// (binary_coded = false) or a 0/1 coding (binary_coded = true). The
// binary-coded marker rule is 2*(1 - |v_i - v_j|), which keeps
// S_ii = 2 * sum(w).
KernelMatrix kernel(const Eigen::MatrixXd& values, bool binary_coded,
                    const Eigen::VectorXd& w, KernelKind kind,
                    std::vector<std::string> snp_ids = {});

// Symmetric PSD square root. Eigenvalues in [-tol*max, 0) are clipped to
// zero; anything lower throws NumericError.
Eigen::MatrixXd symmetric_root(const Eigen::MatrixXd& S, double tol = 1e-8);

void write_kernel(const KernelMatrix& k, const std::vector<std::string>& ids,
                  const std::string& path);

}  // namespace simreg

#endif
