#ifndef SIMREG_SIMULATE_HPP
#define SIMREG_SIMULATE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simreg/domain.hpp"
#include "simreg/inference.hpp"
#include "simreg/rng.hpp"

namespace simreg {

// Censoring presets: Uniform(0, c) upper bounds calibrated for 15/40/90
// percent censoring under the survival generators used here.
double censoring_c_for_preset(int percent);

// n whole-row resamples of the panel (multi-locus genotypes kept intact,
// preserving LD); MAFs are recomputed on the resample.
GenotypePanel bootstrap_genotypes(const GenotypePanel& panel, int n,
                                  std::uint64_t seed);

// log T = -eta + e with extreme-value e, i.e. T = exp(-eta) * Exponential(1):
// hazard exp(eta) on the natural time scale.
Eigen::VectorXd gen_survival_ph(const Eigen::VectorXd& eta, std::uint64_t seed);
Eigen::VectorXd gen_survival_ph(const Eigen::VectorXd& eta, Rng& rng);

// log(exp(T) - 1) = -eta + e with standard logistic e.
Eigen::VectorXd gen_survival_po(const Eigen::VectorXd& eta, std::uint64_t seed);
Eigen::VectorXd gen_survival_po(const Eigen::VectorXd& eta, Rng& rng);

Eigen::VectorXd gen_censoring(int n, double c, std::uint64_t seed);
Eigen::VectorXd gen_censoring(int n, double c, Rng& rng);

enum class SimMethod { kSimRegPh, kSimRegPo, kMinP, kGlobal };
const char* sim_method_name(SimMethod m);
SimMethod parse_sim_method(const std::string& name);

// One simulation design: causal loci with effect sizes, inheritance mode
// (drives both the generator coding and the analysis coding), censoring,
// sample size, generating model and analysis settings.
struct Scenario {
  std::string name = "scenario";
  std::string panel_path;  // reference panel to bootstrap from
  CodingMode mode = CodingMode::kAdditive;
  Model true_model = Model::kPh;
  std::optional<int> censoring_preset;  // 15, 40 or 90
  double censoring_c = 6.7;
  int n = 500;
  double covariate_coef = 1.0;  // one N(0,1) covariate by default
  std::vector<std::pair<std::string, double>> causal;  // snp id -> effect
  std::vector<SimMethod> methods = {SimMethod::kSimRegPh};
  std::vector<double> alphas = {0.05};
  // Analysis settings for the SimReg methods.
  WeightScheme scheme = WeightScheme::maf_pow_neg34();
  KernelKind kernel_kind = KernelKind::kIbs;
  std::optional<PvaluePath> pvalue_path;
  int resamples = 10000;
};

Scenario parse_scenario_file(const std::string& path);
Scenario parse_scenario_text(const std::string& text);

struct MethodSummary {
  SimMethod method;
  std::vector<long> rejections;  // per alpha
};

struct ReplicationSummary {
  std::string scenario;
  std::vector<double> alphas;
  std::vector<MethodSummary> methods;
  int replicates = 0;
  std::uint64_t base_seed = 0;

  double rate(SimMethod m, double alpha) const;
};

// Runs the scenario. Replicate r draws all randomness from streams derived
// from base_seed ^ r, so results are identical for any worker count and any
// partitioning of the replicate range.
ReplicationSummary run_scenario(const Scenario& scenario,
                                const GenotypePanel& panel, int replicates,
                                std::uint64_t base_seed, int threads = 0);

void write_summary(const ReplicationSummary& summary, const std::string& path);

}  // namespace simreg

#endif
