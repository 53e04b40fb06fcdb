// simreg command-line front end: gene scans over survival data, simulation
// runs, and the reference-panel generator.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "simreg/commands.hpp"
#include "simreg/domain.hpp"
#include "simreg/errors.hpp"

namespace {

// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
int run(int argc, char** argv) {
  CLI::App app{"simreg: gene-level similarity regression for survival outcomes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", simreg::kVersion);

  simreg::ScanConfig scan;
  std::string scan_model = "ph", scan_weights = "q34", scan_kernel = "ibs";
  std::string scan_coding = "additive", scan_pvalue;
  int scan_bonf = 0;
  auto* scan_cmd = app.add_subcommand("scan", "gene-based association scan");
  scan_cmd->add_option("--geno", scan.geno_path, "genotype TSV")->required();
  scan_cmd->add_option("--pheno", scan.pheno_path, "phenotype TSV")->required();
  scan_cmd->add_option("--genes", scan.genes_path, "gene map TSV")->required();
  scan_cmd->add_option("--model", scan_model, "ph|po")->capture_default_str();
  scan_cmd->add_option("--weights", scan_weights, "q34|qinv|beta24|uniform")
      ->capture_default_str();
  scan_cmd->add_option("--kernel", scan_kernel, "ibs|linear")->capture_default_str();
  scan_cmd->add_option("--coding", scan_coding, "additive|dominant|recessive")
      ->capture_default_str();
  scan_cmd->add_option("--pvalue", scan_pvalue,
                       "eigen|perturb|moment (default: eigen for ph, perturb for po)");
  scan_cmd->add_option("--resamples", scan.resamples, "resampling draws B")
      ->capture_default_str();
  scan_cmd->add_option("--seed", scan.seed, "RNG seed")->capture_default_str();
  scan_cmd->add_option("--out", scan.out_path, "report TSV path")->required();
  scan_cmd->add_option("--bonferroni-n", scan_bonf,
                       "Bonferroni divisor (default: genes scanned)");
  scan_cmd->add_option("--alpha", scan.alpha, "family-wise level")
      ->capture_default_str();
  scan_cmd->add_option("--dump-kernel", scan.dump_kernel_dir,
                       "directory for per-gene kernel dumps");

  simreg::SimulateConfig sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run a simulation scenario");
  sim_cmd->add_option("--config", sim.config_path, "scenario config file")->required();
  sim_cmd->add_option("--reps", sim.replicates, "replicates")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "base seed")->capture_default_str();
  sim_cmd->add_option("--out", sim.out_path, "summary TSV path")->required();
  sim_cmd->add_option("--threads", sim.threads, "worker threads (0: auto)")
      ->capture_default_str();

  std::string panel_out;
  int panel_n = 969;
  std::uint64_t panel_seed = 20140203;
  auto* panel_cmd = app.add_subcommand(
      "make-panel", "generate the bundled synthetic reference panel");
  panel_cmd->add_option("--out", panel_out, "output TSV path")->required();
  panel_cmd->add_option("--n", panel_n, "subjects")->capture_default_str();
  panel_cmd->add_option("--seed", panel_seed, "RNG seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (scan_cmd->parsed()) {
    scan.model = simreg::parse_model(scan_model);
    scan.scheme = simreg::WeightScheme::parse(scan_weights);
    scan.kernel_kind = simreg::parse_kernel(scan_kernel);
    scan.coding = simreg::parse_coding(scan_coding);
    if (!scan_pvalue.empty()) scan.pvalue_path = simreg::parse_pvalue_path(scan_pvalue);
    if (scan_bonf > 0) scan.bonferroni_n = scan_bonf;
    simreg::cmd_scan(scan);
  } else if (sim_cmd->parsed()) {
    simreg::cmd_simulate(sim);
  } else if (panel_cmd->parsed()) {
    simreg::write_genotypes(simreg::make_reference_panel(panel_n, panel_seed),
                            panel_out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const simreg::NumericError& e) {
    std::fprintf(stderr, "error\tnumeric\t%s\n", e.what());
    return 3;
  } catch (const simreg::DataError& e) {
    std::fprintf(stderr, "error\tdata\t%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error\tinternal\t%s\n", e.what());
    return 3;
  }
}
