#include "simreg/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "simreg/comparators.hpp"
#include "simreg/errors.hpp"

namespace simreg {

namespace {

// Substream ids within one replicate.
enum : std::uint64_t {
  kStreamBootstrap = 1,
  kStreamCovariate = 2,
  kStreamSurvival = 3,
  kStreamCensoring = 4,
  kStreamTest = 5,
};

}  // namespace

double censoring_c_for_preset(int percent) {
  switch (percent) {
    case 15: return 6.7;
    case 40: return 2.0;
    case 90: return 0.2;
  }
  throw DataError("censoring preset must be 15, 40 or 90");
}

GenotypePanel bootstrap_genotypes(const GenotypePanel& panel, int n,
                                  std::uint64_t seed) {
  if (panel.n() == 0) throw DataError("cannot bootstrap an empty panel");
  Rng rng(seed, kStreamBootstrap);
  Eigen::MatrixXi counts(n, panel.m());
  std::vector<std::string> ids(n);
  char buf[16];
  for (int i = 0; i < n; ++i) {
    const int src = static_cast<int>(rng.next_below(panel.n()));
    counts.row(i) = panel.counts.row(src);
    std::snprintf(buf, sizeof(buf), "b%06d", i);
    ids[i] = buf;
  }
  return make_panel(std::move(ids), panel.snp_ids, std::move(counts));
}

Eigen::VectorXd gen_survival_ph(const Eigen::VectorXd& eta, Rng& rng) {
  Eigen::VectorXd t(eta.size());
  for (int i = 0; i < eta.size(); ++i)
    t[i] = std::exp(-eta[i]) * rng.next_exponential();
  return t;
}

Eigen::VectorXd gen_survival_ph(const Eigen::VectorXd& eta, std::uint64_t seed) {
  Rng rng(seed, kStreamSurvival);
  return gen_survival_ph(eta, rng);
}

Eigen::VectorXd gen_survival_po(const Eigen::VectorXd& eta, Rng& rng) {
  Eigen::VectorXd t(eta.size());
  for (int i = 0; i < eta.size(); ++i)
    t[i] = std::log1p(std::exp(-eta[i] + rng.next_logistic()));
  return t;
}

Eigen::VectorXd gen_survival_po(const Eigen::VectorXd& eta, std::uint64_t seed) {
  Rng rng(seed, kStreamSurvival);
  return gen_survival_po(eta, rng);
}

Eigen::VectorXd gen_censoring(int n, double c, Rng& rng) {
  if (!(c > 0)) throw DataError("censoring bound c must be positive");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = c * rng.next_double();
  return v;
}

Eigen::VectorXd gen_censoring(int n, double c, std::uint64_t seed) {
  Rng rng(seed, kStreamCensoring);
  return gen_censoring(n, c, rng);
}

const char* sim_method_name(SimMethod m) {
  switch (m) {
    case SimMethod::kSimRegPh: return "simreg_ph";
    case SimMethod::kSimRegPo: return "simreg_po";
    case SimMethod::kMinP: return "minp";
    case SimMethod::kGlobal: return "global";
  }
  return "?";
}

SimMethod parse_sim_method(const std::string& name) {
  if (name == "simreg_ph") return SimMethod::kSimRegPh;
  if (name == "simreg_po") return SimMethod::kSimRegPo;
  if (name == "minp") return SimMethod::kMinP;
  if (name == "global") return SimMethod::kGlobal;
  throw DataError("unknown simulation method: " + name);
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  Scenario sc;
  bool preset_seen = false, c_seen = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto rest = [&]() {
      std::string value;
      std::getline(ls, value);
      const auto b = value.find_first_not_of(" \t");
      return b == std::string::npos ? std::string() : value.substr(b);
    };
    auto need = [&](const std::string& value) {
      if (value.empty())
        throw DataError("scenario line " + std::to_string(lineno) +
                        ": missing value for '" + key + "'");
      return value;
    };
    if (key == "name") {
      sc.name = need(rest());
    } else if (key == "panel") {
      sc.panel_path = need(rest());
    } else if (key == "mode") {
      sc.mode = parse_coding(need(rest()));
    } else if (key == "true_model") {
      sc.true_model = parse_model(need(rest()));
    } else if (key == "censoring") {
      sc.censoring_preset = std::stoi(need(rest()));
      sc.censoring_c = censoring_c_for_preset(*sc.censoring_preset);
      preset_seen = true;
    } else if (key == "c") {
      sc.censoring_c = std::stod(need(rest()));
      if (!(sc.censoring_c > 0)) throw DataError("c must be positive");
      c_seen = true;
    } else if (key == "n") {
      sc.n = std::stoi(need(rest()));
      if (sc.n < 2) throw DataError("scenario n must be >= 2");
    } else if (key == "covariate_coef") {
      sc.covariate_coef = std::stod(need(rest()));
    } else if (key == "causal") {
      std::string snp;
      double gamma;
      std::istringstream cs(need(rest()));
      if (!(cs >> snp >> gamma))
        throw DataError("scenario line " + std::to_string(lineno) +
                        ": causal needs '<snp_id> <effect>'");
      if (!std::isfinite(gamma)) throw DataError("causal effect must be finite");
      sc.causal.emplace_back(snp, gamma);
    } else if (key == "methods") {
      sc.methods.clear();
      for (const auto& tok : split_list(need(rest())))
        sc.methods.push_back(parse_sim_method(tok));
    } else if (key == "alphas") {
      sc.alphas.clear();
      for (const auto& tok : split_list(need(rest())))
        sc.alphas.push_back(std::stod(tok));
    } else if (key == "weights") {
      sc.scheme = WeightScheme::parse(need(rest()));
    } else if (key == "kernel") {
      sc.kernel_kind = parse_kernel(need(rest()));
    } else if (key == "pvalue") {
      sc.pvalue_path = parse_pvalue_path(need(rest()));
    } else if (key == "resamples") {
      sc.resamples = std::stoi(need(rest()));
    } else {
      throw DataError("scenario line " + std::to_string(lineno) +
                      ": unknown key '" + key + "'");
    }
  }
  if (preset_seen && c_seen)
    throw DataError("scenario sets both a censoring preset and an explicit c");
  if (sc.methods.empty()) throw DataError("scenario lists no methods");
  if (sc.alphas.empty()) throw DataError("scenario lists no alphas");
  return sc;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

double ReplicationSummary::rate(SimMethod m, double alpha) const {
  for (const auto& ms : methods) {
    if (ms.method != m) continue;
    for (std::size_t a = 0; a < alphas.size(); ++a)
      if (alphas[a] == alpha)
        return replicates > 0 ? static_cast<double>(ms.rejections[a]) / replicates
                              : 0.0;
  }
  throw DataError("method/alpha not present in summary");
}

namespace {

struct ReplicateCounts {
  std::vector<std::vector<long>> rejections;  // method x alpha
};

ReplicateCounts run_one_replicate(const Scenario& sc, const GenotypePanel& panel,
                                  const std::vector<int>& causal_cols,
                                  const std::vector<int>& analysis_cols,
                                  std::uint64_t replicate_seed) {
  const int n = sc.n;
  GenotypePanel boot = bootstrap_genotypes(panel, n, replicate_seed);

  Rng cov_rng(replicate_seed, kStreamCovariate);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = cov_rng.next_normal();

  // Linear predictor on the hazard scale: eta = coef * X + sum gamma * G.
  Eigen::VectorXd eta = sc.covariate_coef * x;
  if (!causal_cols.empty()) {
    Eigen::MatrixXi sub(n, causal_cols.size());
    for (std::size_t j = 0; j < causal_cols.size(); ++j)
      sub.col(j) = boot.counts.col(causal_cols[j]);
    const Eigen::MatrixXd coded = code_counts(sub, sc.mode).values;
    for (std::size_t j = 0; j < causal_cols.size(); ++j)
      eta += sc.causal[j].second * coded.col(j);
  }

  Rng surv_rng(replicate_seed, kStreamSurvival);
  const Eigen::VectorXd t = sc.true_model == Model::kPh
                                ? gen_survival_ph(eta, surv_rng)
                                : gen_survival_po(eta, surv_rng);
  Rng cens_rng(replicate_seed, kStreamCensoring);
  const Eigen::VectorXd c = gen_censoring(n, sc.censoring_c, cens_rng);

  SurvivalSample sample;
  sample.sample_ids = boot.sample_ids;
  sample.time.resize(n);
  sample.event.resize(n);
  sample.covariates = x;
  sample.covariate_names = {"x"};
  for (int i = 0; i < n; ++i) {
    sample.time[i] = std::min(t[i], c[i]);
    sample.event[i] = t[i] <= c[i] ? 1 : 0;
  }

  // Analysis runs on the non-causal loci only.
  GeneMap gm;
  std::vector<std::string> kernel_snps;
  for (int col : analysis_cols) kernel_snps.push_back(panel.snp_ids[col]);
  gm.genes.push_back({"gene", kernel_snps});
  Dataset ds = join(boot, sample, gm);

  GeneTestRunner runner(ds);
  const std::uint64_t test_seed = mix_seed(replicate_seed, kStreamTest);

  ReplicateCounts counts;
  counts.rejections.assign(sc.methods.size(),
                           std::vector<long>(sc.alphas.size(), 0));
  for (std::size_t mi = 0; mi < sc.methods.size(); ++mi) {
    double p = 1.0;
    switch (sc.methods[mi]) {
      case SimMethod::kSimRegPh:
      case SimMethod::kSimRegPo:
      case SimMethod::kGlobal: {
        TestConfig cfg;
        cfg.model = sc.methods[mi] == SimMethod::kSimRegPo ? Model::kPo : Model::kPh;
        cfg.scheme = sc.scheme;
        cfg.kernel_kind = sc.methods[mi] == SimMethod::kGlobal ? KernelKind::kLinear
                                                               : sc.kernel_kind;
        cfg.coding = sc.mode;
        cfg.kernel_on_coded = sc.mode != CodingMode::kAdditive;
        cfg.path = sc.pvalue_path;
        cfg.resamples = sc.resamples;
        cfg.seed = test_seed;
        const TestResult res = runner.run("gene", cfg);
        p = res.valid ? res.p_value : 1.0;
        break;
      }
      case SimMethod::kMinP: {
        const MinPResult res = minp_gene_test(ds, "gene", sc.mode);
        p = res.adjusted;
        break;
      }
    }
    for (std::size_t a = 0; a < sc.alphas.size(); ++a)
      if (p <= sc.alphas[a]) ++counts.rejections[mi][a];
  }
  return counts;
}

}  // namespace

ReplicationSummary run_scenario(const Scenario& sc, const GenotypePanel& panel,
                                int replicates, std::uint64_t base_seed,
                                int threads) {
  // Resolve causal and analysis columns once, against the reference panel.
  std::vector<int> causal_cols;
  std::unordered_set<std::string> causal_ids;
  for (const auto& [snp, gamma] : sc.causal) {
    bool found = false;
    for (int j = 0; j < panel.m(); ++j) {
      if (panel.snp_ids[j] == snp) {
        causal_cols.push_back(j);
        found = true;
        break;
      }
    }
    if (!found) throw DataError("scenario causal SNP not in panel: " + snp);
    causal_ids.insert(snp);
  }
  std::vector<int> analysis_cols;
  for (int j = 0; j < panel.m(); ++j)
    if (!causal_ids.count(panel.snp_ids[j])) analysis_cols.push_back(j);
  if (analysis_cols.empty())
    throw DataError("no analysis SNPs left after excluding causal loci");

  ReplicationSummary summary;
  summary.scenario = sc.name;
  summary.alphas = sc.alphas;
  summary.replicates = replicates;
  summary.base_seed = base_seed;
  for (SimMethod m : sc.methods)
    summary.methods.push_back({m, std::vector<long>(sc.alphas.size(), 0)});
  if (replicates <= 0) return summary;

  int nthreads = threads > 0 ? threads
                             : static_cast<int>(std::max(
                                   1u, std::thread::hardware_concurrency()));
  nthreads = std::min(nthreads, replicates);

  std::vector<ReplicateCounts> partial(nthreads);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nthreads);
  for (int w = 0; w < nthreads; ++w) {
    pool.emplace_back([&, w]() {
      ReplicateCounts acc;
      acc.rejections.assign(sc.methods.size(),
                            std::vector<long>(sc.alphas.size(), 0));
      try {
        for (;;) {
          const int r = next.fetch_add(1);
          if (r >= replicates) break;
          const std::uint64_t seed = base_seed ^ static_cast<std::uint64_t>(r);
          const ReplicateCounts one =
              run_one_replicate(sc, panel, causal_cols, analysis_cols, seed);
          for (std::size_t mi = 0; mi < sc.methods.size(); ++mi)
            for (std::size_t a = 0; a < sc.alphas.size(); ++a)
              acc.rejections[mi][a] += one.rejections[mi][a];
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
      partial[w] = std::move(acc);
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  for (const auto& acc : partial)
    for (std::size_t mi = 0; mi < sc.methods.size(); ++mi)
      for (std::size_t a = 0; a < sc.alphas.size(); ++a)
        summary.methods[mi].rejections[a] += acc.rejections[mi][a];
  return summary;
}

void write_summary(const ReplicationSummary& summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "scenario\tmethod\talpha\trejections\treplicates\trate\n";
  char buf[64];
  for (const auto& ms : summary.methods) {
    for (std::size_t a = 0; a < summary.alphas.size(); ++a) {
      const double rate = summary.replicates > 0
                              ? static_cast<double>(ms.rejections[a]) /
                                    summary.replicates
                              : 0.0;
      std::snprintf(buf, sizeof(buf), "%.6g", rate);
      out << summary.scenario << '\t' << sim_method_name(ms.method) << '\t'
          << summary.alphas[a] << '\t' << ms.rejections[a] << '\t'
          << summary.replicates << '\t' << buf << '\n';
    }
  }
}

}  // namespace simreg
