#include "simreg/similarity.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>

#include "simreg/errors.hpp"

namespace simreg {

WeightScheme WeightScheme::parse(const std::string& name) {
  if (name == "uniform") return uniform();
  if (name == "q34") return maf_pow_neg34();
  if (name == "qinv") return maf_inverse();
  if (name == "beta24") return one_minus_maf_pow24();
  throw DataError("unknown weight scheme: " + name);
}

const char* WeightScheme::name() const {
  switch (kind) {
    case kUniform: return "uniform";
    case kMafPowNeg34: return "q34";
    case kMafInverse: return "qinv";
    case kOneMinusMafPow24: return "beta24";
    case kCustom: return "custom";
  }
  return "?";
}

Eigen::VectorXd weights(const Eigen::VectorXd& maf, const WeightScheme& scheme) {
  const int m = static_cast<int>(maf.size());
  if (scheme.kind == WeightScheme::kCustom) {
    if (scheme.custom.size() != m)
      throw DataError("custom weight vector length does not match SNP count");
    if ((scheme.custom.array() <= 0).any())
      throw DataError("custom weights must be strictly positive");
    return scheme.custom;
  }
  Eigen::VectorXd w(m);
  for (int j = 0; j < m; ++j) {
    const double q = maf[j];
    if (!(q > 0.0) || q > 0.5)
      throw DataError("weights need maf in (0, 0.5]; got " + std::to_string(q) +
                      " (monomorphic SNPs must be pre-filtered)");
    switch (scheme.kind) {
      case WeightScheme::kUniform: w[j] = 1.0; break;
      case WeightScheme::kMafPowNeg34: w[j] = std::pow(q, -0.75); break;
      case WeightScheme::kMafInverse: w[j] = 1.0 / q; break;
      case WeightScheme::kOneMinusMafPow24: w[j] = std::pow(1.0 - q, 24.0); break;
      case WeightScheme::kCustom: break;  // handled above
    }
  }
  return w;
}

int ibs_marker(int a, int b) {
  const int d = a > b ? a - b : b - a;
  return 2 - d;
}

const char* kernel_name(KernelKind kind) {
  return kind == KernelKind::kIbs ? "ibs" : "linear";
}

KernelKind parse_kernel(const std::string& name) {
  if (name == "ibs") return KernelKind::kIbs;
  if (name == "linear") return KernelKind::kLinear;
  throw DataError("unknown kernel kind: " + name);
}

namespace {

// Cholesky factor of the 3x3 IBS class Gram matrix
// [[2,1,0],[1,2,1],[0,1,2]], so that one marker contributes three factor
// columns: row of the factor = L3[g] for dosage class g.
void ibs_class_rows(double rows[3][3]) {
  Eigen::Matrix3d k3;
  k3 << 2, 1, 0, 1, 2, 1, 0, 1, 2;
  Eigen::LLT<Eigen::Matrix3d> llt(k3);
  Eigen::Matrix3d l = llt.matrixL();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) rows[a][b] = l(a, b);
}

}  // namespace

KernelMatrix kernel(const Eigen::MatrixXd& values, bool binary_coded,
                    const Eigen::VectorXd& w, KernelKind kind,
                    std::vector<std::string> snp_ids) {
  const int n = static_cast<int>(values.rows());
  const int m = static_cast<int>(values.cols());
  if (m < 1) throw DataError("kernel needs at least one SNP");
  if (w.size() != m)
    throw DataError("weight vector length " + std::to_string(w.size()) +
                    " does not match SNP count " + std::to_string(m));

  KernelMatrix out;
  out.kind = kind;
  out.w = w;
  out.snp_ids = std::move(snp_ids);

  if (kind == KernelKind::kLinear) {
    Eigen::MatrixXd g = values;
    for (int j = 0; j < m; ++j) g.col(j) *= std::sqrt(w[j]);
    out.factor = std::move(g);
    out.S = out.factor * out.factor.transpose();
    return out;
  }

  // IBS: per-marker class factor, width 3 (counts) or 2 (0/1 coding).
  const int width = binary_coded ? 2 : 3;
  out.factor.setZero(n, width * m);
  double l3[3][3];
  ibs_class_rows(l3);
  const double sqrt2 = std::sqrt(2.0);
  for (int j = 0; j < m; ++j) {
    const double sw = std::sqrt(w[j]);
    for (int i = 0; i < n; ++i) {
      const double v = values(i, j);
      const int cls = static_cast<int>(v);
      if (v != cls || cls < 0 || cls > (binary_coded ? 1 : 2))
        throw DataError("IBS kernel needs integer dosage values in range");
      if (binary_coded) {
        out.factor(i, width * j + cls) = sqrt2 * sw;
      } else {
        for (int b = 0; b < 3; ++b)
          out.factor(i, width * j + b) = sw * l3[cls][b];
      }
    }
  }

  // Exact marker-rule evaluation on the upper triangle keeps the matrix
  // bit-symmetric; the factor product would round symmetrically anyway but
  // the direct rule is the definition.
  out.S.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int jj = i; jj < n; ++jj) {
      double s = 0;
      for (int j = 0; j < m; ++j) {
        const double d = std::abs(values(i, j) - values(jj, j));
        s += w[j] * (binary_coded ? 2.0 * (1.0 - d) : 2.0 - d);
      }
      out.S(i, jj) = s;
      out.S(jj, i) = s;
    }
  }
  return out;
}

Eigen::MatrixXd symmetric_root(const Eigen::MatrixXd& S, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw NumericError("eigendecomposition failed in symmetric_root");
  Eigen::VectorXd ev = es.eigenvalues();
  const double max_ev = ev.maxCoeff();
  const double floor = -tol * std::max(max_ev, 0.0);
  Eigen::VectorXd root_ev(ev.size());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < floor)
      throw NumericError("matrix is not PSD: eigenvalue " + std::to_string(ev[i]) +
                         " below tolerance " + std::to_string(floor));
    root_ev[i] = ev[i] > 0 ? std::sqrt(ev[i]) : 0.0;
  }
  return es.eigenvectors() * root_ev.asDiagonal() * es.eigenvectors().transpose();
}

void write_kernel(const KernelMatrix& k, const std::vector<std::string>& ids,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "sample_id";
  for (const auto& id : ids) out << '\t' << id;
  out << '\n';
  out.precision(17);
  for (int i = 0; i < k.n(); ++i) {
    out << ids[i];
    for (int j = 0; j < k.n(); ++j) out << '\t' << k.S(i, j);
    out << '\n';
  }
}

}  // namespace simreg
