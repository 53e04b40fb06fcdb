#ifndef SIMREG_DOMAIN_HPP
#define SIMREG_DOMAIN_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace simreg {

// n x M minor-allele count matrix with SNP metadata. Immutable after
// construction; column frequencies are folded so that maf <= 0.5, flipping
// the stored counts (2 - g) where the raw coded allele was the major one.
struct GenotypePanel {
  std::vector<std::string> sample_ids;
  std::vector<std::string> snp_ids;
  Eigen::MatrixXi counts;        // entries in {0,1,2}, minor-allele dosage
  Eigen::VectorXd maf;           // in [0, 0.5]; 0 marks a monomorphic SNP
  std::vector<bool> flipped;     // minor allele recoded at ingestion
  std::vector<bool> monomorphic; // maf == 0; excluded from kernels

  int n() const { return static_cast<int>(counts.rows()); }
  int m() const { return static_cast<int>(counts.cols()); }
  std::vector<int> polymorphic_columns() const;
};

// Builds a panel from raw counts: computes maf, folds columns with raw
// frequency > 0.5, flags monomorphic SNPs.
GenotypePanel make_panel(std::vector<std::string> sample_ids,
                         std::vector<std::string> snp_ids,
                         Eigen::MatrixXi counts);

enum class MissingPolicy { kReject, kDropSubject };

struct IngestReport {
  int subjects_dropped = 0;
  std::vector<std::string> dropped_ids;
};

GenotypePanel load_genotypes(const std::string& path, MissingPolicy policy,
                             IngestReport* report = nullptr);
void write_genotypes(const GenotypePanel& panel, const std::string& path);

// Per-subject observed time, event indicator and covariates.
struct SurvivalSample {
  std::vector<std::string> sample_ids;
  Eigen::VectorXd time;    // > 0
  Eigen::VectorXi event;   // 0/1
  Eigen::MatrixXd covariates;  // n x K, K may be 0
  std::vector<std::string> covariate_names;

  int n() const { return static_cast<int>(time.size()); }
  int k() const { return static_cast<int>(covariates.cols()); }
};

SurvivalSample load_phenotypes(const std::string& path);

// gene -> ordered SNP id list, in file order.
struct GeneMap {
  std::vector<std::pair<std::string, std::vector<std::string>>> genes;

  const std::vector<std::string>* find(const std::string& gene) const;
};

GeneMap load_gene_map(const std::string& path);

enum class CodingMode { kAdditive, kDominant, kRecessive };

const char* coding_name(CodingMode mode);
CodingMode parse_coding(const std::string& name);

// Genotypes recoded under an inheritance mode. Additive keeps {0,1,2};
// dominant/recessive produce {0,1} columns.
struct CodedGenotypes {
  Eigen::MatrixXd values;
  CodingMode mode = CodingMode::kAdditive;

  bool binary() const { return mode != CodingMode::kAdditive; }
};

CodedGenotypes code_genotypes(const GenotypePanel& panel, CodingMode mode);
CodedGenotypes code_counts(const Eigen::MatrixXi& counts, CodingMode mode);

// Joined, row-aligned analysis dataset. Rows follow a canonical order
// (lexicographic sample id) so downstream results do not depend on input
// row order. Genes with no SNP resolving in the panel are kept in
// unresolved_genes rather than silently dropped.
struct Dataset {
  GenotypePanel panel;
  SurvivalSample sample;
  GeneMap genes;
  std::vector<std::string> dropped_sample_ids;  // ids outside the intersection
  std::vector<std::string> unresolved_genes;
  std::map<std::string, std::vector<int>> gene_columns;  // panel column indices

  int n() const { return sample.n(); }
};

Dataset join(const GenotypePanel& panel, const SurvivalSample& sample,
             const GeneMap& gene_map);

}  // namespace simreg

#endif
