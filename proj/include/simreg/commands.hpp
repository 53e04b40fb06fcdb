#ifndef SIMREG_COMMANDS_HPP
#define SIMREG_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "simreg/inference.hpp"

namespace simreg {

inline constexpr const char* kVersion = "0.1.0";

// Gene-scan front end. Writes a TSV report plus a <out>.meta sidecar with
// the seed and the full configuration echo.
struct ScanConfig {
  std::string geno_path;
  std::string pheno_path;
  std::string genes_path;
  Model model = Model::kPh;
  WeightScheme scheme = WeightScheme::maf_pow_neg34();
  KernelKind kernel_kind = KernelKind::kIbs;
  CodingMode coding = CodingMode::kAdditive;
  std::optional<PvaluePath> pvalue_path;
  int resamples = 10000;
  std::uint64_t seed = 1;
  std::string out_path;
  std::optional<int> bonferroni_n;  // default: number of genes scanned
  double alpha = 0.05;
  std::string dump_kernel_dir;  // when set, write per-gene kernel TSVs
};

// Stable, versioned report schema.
inline constexpr const char* kScanReportHeader =
    "gene\tn_snps\tmethod\tQ\tp_value\tbonferroni_threshold\tsignificant\treason";

void cmd_scan(const ScanConfig& config);

struct SimulateConfig {
  std::string config_path;
  int replicates = 1000;
  std::uint64_t seed = 1;
  std::string out_path;
  int threads = 0;  // 0: hardware concurrency
};

void cmd_simulate(const SimulateConfig& config);

// Generates the bundled reference panel: 15 SNPs, three designated loci
// (rs_r/rs_u/rs_c) with target MAFs 0.036/0.132/0.419 and an LD block
// around rs_c, via a one-factor latent Gaussian haplotype model.
GenotypePanel make_reference_panel(int n, std::uint64_t seed);

}  // namespace simreg

#endif
