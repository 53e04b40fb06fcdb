#include "simreg/commands.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cstdio>
#include <fstream>

#include "simreg/errors.hpp"
#include "simreg/rng.hpp"
#include "simreg/simulate.hpp"

namespace simreg {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_meta(const std::string& out_path,
                const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream meta(out_path + ".meta");
  if (!meta) throw DataError("cannot write sidecar: " + out_path + ".meta");
  for (const auto& [k, v] : kv) meta << k << '\t' << v << '\n';
}

}  // namespace

void cmd_scan(const ScanConfig& config) {
  const GenotypePanel panel = load_genotypes(config.geno_path, MissingPolicy::kReject);
  const SurvivalSample sample = load_phenotypes(config.pheno_path);
  const GeneMap gene_map = load_gene_map(config.genes_path);
  const Dataset ds = join(panel, sample, gene_map);

  const int n_genes = static_cast<int>(gene_map.genes.size());
  const int divisor = config.bonferroni_n.value_or(n_genes);
  const double threshold = config.alpha / divisor;

  GeneTestRunner runner(ds);
  TestConfig tc;
  tc.model = config.model;
  tc.scheme = config.scheme;
  tc.kernel_kind = config.kernel_kind;
  tc.coding = config.coding;
  tc.kernel_on_coded = config.coding != CodingMode::kAdditive;
  tc.path = config.pvalue_path;
  tc.resamples = config.resamples;
  tc.seed = config.seed;
  if (tc.resamples < 100) throw DataError("resamples must be >= 100");

  std::ofstream out(config.out_path);
  if (!out) throw DataError("cannot write report: " + config.out_path);
  out << kScanReportHeader << '\n';
  for (const auto& [gene, snps] : gene_map.genes) {
    const TestResult res = runner.run(gene, tc);
    out << gene << '\t' << res.n_snps << '\t' << res.method << '\t';
    if (res.valid) {
      out << fmt(res.q) << '\t' << fmt(res.p_value) << '\t' << fmt(threshold)
          << '\t' << (res.p_value <= threshold ? 1 : 0) << "\t.\n";
    } else {
      out << "NA\tNA\t" << fmt(threshold) << "\t0\t" << res.reason << '\n';
    }
    if (!config.dump_kernel_dir.empty() && res.valid) {
      // Rebuild the gene kernel for the dump; scan results are unaffected.
      auto it = ds.gene_columns.find(gene);
      std::vector<int> cols;
      for (int j : it->second)
        if (!ds.panel.monomorphic[j]) cols.push_back(j);
      Eigen::MatrixXd values(ds.n(), cols.size());
      Eigen::VectorXd maf(cols.size());
      std::vector<std::string> ids;
      for (std::size_t j = 0; j < cols.size(); ++j) {
        values.col(j) = ds.panel.counts.col(cols[j]).cast<double>();
        maf[j] = ds.panel.maf[cols[j]];
        ids.push_back(ds.panel.snp_ids[cols[j]]);
      }
      bool binary = false;
      if (tc.kernel_on_coded) {
        Eigen::MatrixXi sub(ds.n(), cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j)
          sub.col(j) = ds.panel.counts.col(cols[j]);
        values = code_counts(sub, tc.coding).values;
        binary = true;
      }
      const KernelMatrix k =
          kernel(values, binary, weights(maf, tc.scheme), tc.kernel_kind, ids);
      write_kernel(k, ds.sample.sample_ids,
                   config.dump_kernel_dir + "/" + gene + ".kernel.tsv");
    }
  }
  out.close();

  write_meta(config.out_path,
             {{"simreg_version", kVersion},
              {"command", "scan"},
              {"geno", config.geno_path},
              {"pheno", config.pheno_path},
              {"genes", config.genes_path},
              {"model", model_name(config.model)},
              {"weights", config.scheme.name()},
              {"kernel", kernel_name(config.kernel_kind)},
              {"coding", coding_name(config.coding)},
              {"pvalue", pvalue_path_name(tc.effective_path())},
              {"resamples", std::to_string(config.resamples)},
              {"seed", std::to_string(config.seed)},
              {"alpha", fmt(config.alpha)},
              {"bonferroni_divisor", std::to_string(divisor)},
              {"genes_scanned", std::to_string(n_genes)}});
}

void cmd_simulate(const SimulateConfig& config) {
  Scenario sc = parse_scenario_file(config.config_path);
  if (sc.panel_path.empty())
    throw DataError("scenario config must set 'panel <path>'");
  const GenotypePanel panel =
      load_genotypes(sc.panel_path, MissingPolicy::kReject);
  const ReplicationSummary summary =
      run_scenario(sc, panel, config.replicates, config.seed, config.threads);
  write_summary(summary, config.out_path);
  write_meta(config.out_path, {{"simreg_version", kVersion},
                               {"command", "simulate"},
                               {"config", config.config_path},
                               {"scenario", sc.name},
                               {"replicates", std::to_string(config.replicates)},
                               {"seed", std::to_string(config.seed)}});
}

GenotypePanel make_reference_panel(int n, std::uint64_t seed) {
  // Target allele frequencies. rs_c sits in a six-SNP LD block; rs_r and
  // rs_u are kept free of LD with everything else.
  struct SnpSpec {
    const char* id;
    double maf;
    double load;  // loading on the shared rs_c block factor
  };
  const SnpSpec specs[] = {
      {"rs_r", 0.036, 0.0},  {"rs_u", 0.132, 0.0},  {"rs_c", 0.419, 1.0},
      {"rs04", 0.430, 0.87}, {"rs05", 0.380, 0.86}, {"rs06", 0.350, 0.88},
      {"rs07", 0.310, 0.85}, {"rs08", 0.270, 0.86}, {"rs09", 0.400, 0.84},
      {"rs10", 0.050, 0.0},  {"rs11", 0.080, 0.0},  {"rs12", 0.110, 0.0},
      {"rs13", 0.180, 0.0},  {"rs14", 0.230, 0.0},  {"rs15", 0.300, 0.0},
  };
  const int m = static_cast<int>(std::size(specs));

  boost::math::normal_distribution<double> norm;
  std::vector<double> cut(m);
  for (int j = 0; j < m; ++j) cut[j] = boost::math::quantile(norm, specs[j].maf);

  Rng rng(seed);
  Eigen::MatrixXi counts(n, m);
  for (int i = 0; i < n; ++i) {
    for (int hap = 0; hap < 2; ++hap) {
      const double shared = rng.next_normal();
      for (int j = 0; j < m; ++j) {
        const double load = specs[j].load;
        const double z = load * shared +
                         std::sqrt(1.0 - load * load) * rng.next_normal();
        const int allele = z < cut[j] ? 1 : 0;
        if (hap == 0)
          counts(i, j) = allele;
        else
          counts(i, j) += allele;
      }
    }
  }

  std::vector<std::string> sample_ids(n);
  char buf[16];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "v%04d", i);
    sample_ids[i] = buf;
  }
  std::vector<std::string> snp_ids;
  for (const auto& s : specs) snp_ids.push_back(s.id);
  return make_panel(std::move(sample_ids), std::move(snp_ids), std::move(counts));
}

}  // namespace simreg
