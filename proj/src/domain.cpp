#include "simreg/domain.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "simreg/errors.hpp"

namespace simreg {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

// Reads non-empty, non-comment lines split on tabs.
std::vector<std::vector<std::string>> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(split_tabs(line));
  }
  return rows;
}

int parse_count(const std::string& tok, int row, int col) {
  if (tok.size() == 1 && tok[0] >= '0' && tok[0] <= '2') return tok[0] - '0';
  throw DataError("genotype parse error at data row " + std::to_string(row) +
                  ", column " + std::to_string(col) + ": '" + tok +
                  "' is not 0/1/2 or NA");
}

double parse_real(const std::string& tok, const std::string& what) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw DataError("cannot parse " + what + ": '" + tok + "'");
  }
  if (pos != tok.size()) throw DataError("cannot parse " + what + ": '" + tok + "'");
  return v;
}

}  // namespace

std::vector<int> GenotypePanel::polymorphic_columns() const {
  std::vector<int> cols;
  for (int j = 0; j < m(); ++j)
    if (!monomorphic[j]) cols.push_back(j);
  return cols;
}

GenotypePanel make_panel(std::vector<std::string> sample_ids,
                         std::vector<std::string> snp_ids,
                         Eigen::MatrixXi counts) {
  const int n = static_cast<int>(counts.rows());
  const int m = static_cast<int>(counts.cols());
  if (static_cast<int>(sample_ids.size()) != n ||
      static_cast<int>(snp_ids.size()) != m)
    throw DataError("panel dimensions do not match id lists");

  GenotypePanel panel;
  panel.sample_ids = std::move(sample_ids);
  panel.snp_ids = std::move(snp_ids);
  panel.counts = std::move(counts);
  panel.maf = Eigen::VectorXd(m);
  panel.flipped.assign(m, false);
  panel.monomorphic.assign(m, false);

  for (int j = 0; j < m; ++j) {
    double freq = panel.counts.col(j).sum() / (2.0 * n);
    if (freq > 0.5) {
      panel.flipped[j] = true;
      for (int i = 0; i < n; ++i) panel.counts(i, j) = 2 - panel.counts(i, j);
      freq = 1.0 - freq;
    }
    panel.maf[j] = freq;
    panel.monomorphic[j] = (freq == 0.0);
  }
  return panel;
}

GenotypePanel load_genotypes(const std::string& path, MissingPolicy policy,
                             IngestReport* report) {
  auto rows = read_table(path);
  if (rows.empty()) throw DataError("empty genotype file: " + path);

  // Header: either "<id-col> snp1 ... snpM" or just the SNP ids.
  auto header = rows.front();
  const std::size_t data_fields = rows.size() > 1 ? rows[1].size() : header.size() + 1;
  std::vector<std::string> snp_ids;
  if (header.size() + 1 == data_fields) {
    snp_ids = header;
  } else if (header.size() == data_fields) {
    snp_ids.assign(header.begin() + 1, header.end());
  } else {
    throw DataError("genotype header has " + std::to_string(header.size()) +
                    " fields but data rows have " + std::to_string(data_fields));
  }
  const int m = static_cast<int>(snp_ids.size());
  if (m == 0) throw DataError("genotype file has no SNP columns");

  std::vector<std::string> ids;
  std::vector<int> flat;
  std::unordered_set<std::string> seen;
  int dropped = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (static_cast<int>(row.size()) != m + 1)
      throw DataError("genotype row " + std::to_string(r) + " has " +
                      std::to_string(row.size()) + " fields, expected " +
                      std::to_string(m + 1));
    bool missing = false;
    std::vector<int> vals(m);
    for (int j = 0; j < m; ++j) {
      const std::string& tok = row[j + 1];
      if (tok == "NA") {
        if (policy == MissingPolicy::kReject)
          throw DataError("missing genotype (NA) at data row " +
                          std::to_string(r) + ", column " +
                          std::to_string(j + 1) + " under reject policy");
        missing = true;
        break;
      }
      vals[j] = parse_count(tok, static_cast<int>(r), j + 1);
    }
    if (missing) {
      ++dropped;
      if (report) report->dropped_ids.push_back(row[0]);
      continue;
    }
    if (!seen.insert(row[0]).second)
      throw DataError("duplicate sample id: " + row[0]);
    ids.push_back(row[0]);
    flat.insert(flat.end(), vals.begin(), vals.end());
  }
  if (report) report->subjects_dropped = dropped;
  if (ids.empty()) throw DataError("no usable subjects in " + path);

  Eigen::MatrixXi counts(static_cast<int>(ids.size()), m);
  for (int i = 0; i < counts.rows(); ++i)
    for (int j = 0; j < m; ++j) counts(i, j) = flat[i * m + j];
  return make_panel(std::move(ids), std::move(snp_ids), std::move(counts));
}

void write_genotypes(const GenotypePanel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "sample_id";
  for (const auto& id : panel.snp_ids) out << '\t' << id;
  out << '\n';
  for (int i = 0; i < panel.n(); ++i) {
    out << panel.sample_ids[i];
    for (int j = 0; j < panel.m(); ++j) out << '\t' << panel.counts(i, j);
    out << '\n';
  }
}

SurvivalSample load_phenotypes(const std::string& path) {
  auto rows = read_table(path);
  if (rows.size() < 2) throw DataError("phenotype file needs a header and data: " + path);
  const auto& header = rows.front();
  if (header.size() < 3)
    throw DataError("phenotype header needs sample_id, time, event columns");
  const int k = static_cast<int>(header.size()) - 3;

  SurvivalSample s;
  s.covariate_names.assign(header.begin() + 3, header.end());
  const int n = static_cast<int>(rows.size()) - 1;
  s.sample_ids.resize(n);
  s.time.resize(n);
  s.event.resize(n);
  s.covariates.resize(n, k);
  std::unordered_set<std::string> seen;
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    if (static_cast<int>(row.size()) != k + 3)
      throw DataError("phenotype row " + std::to_string(i + 1) +
                      " has wrong field count");
    if (!seen.insert(row[0]).second)
      throw DataError("duplicate sample id: " + row[0]);
    s.sample_ids[i] = row[0];
    s.time[i] = parse_real(row[1], "time");
    if (!(s.time[i] > 0))
      throw DataError("time must be > 0 (sample " + row[0] + ")");
    const double ev = parse_real(row[2], "event");
    if (ev != 0.0 && ev != 1.0)
      throw DataError("event must be 0 or 1 (sample " + row[0] + ")");
    s.event[i] = static_cast<int>(ev);
    for (int j = 0; j < k; ++j)
      s.covariates(i, j) = parse_real(row[3 + j], "covariate " + header[3 + j]);
  }
  return s;
}

const std::vector<std::string>* GeneMap::find(const std::string& gene) const {
  for (const auto& [name, snps] : genes)
    if (name == gene) return &snps;
  return nullptr;
}

GeneMap load_gene_map(const std::string& path) {
  auto rows = read_table(path);
  GeneMap map;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& row : rows) {
    if (row.size() != 2)
      throw DataError("gene map lines must be gene<TAB>snp_id");
    auto it = index.find(row[0]);
    if (it == index.end()) {
      index.emplace(row[0], map.genes.size());
      map.genes.push_back({row[0], {row[1]}});
    } else {
      map.genes[it->second].second.push_back(row[1]);
    }
  }
  if (map.genes.empty()) throw DataError("empty gene map: " + path);
  return map;
}

const char* coding_name(CodingMode mode) {
  switch (mode) {
    case CodingMode::kAdditive: return "additive";
    case CodingMode::kDominant: return "dominant";
    case CodingMode::kRecessive: return "recessive";
  }
  return "?";
}

CodingMode parse_coding(const std::string& name) {
  if (name == "additive") return CodingMode::kAdditive;
  if (name == "dominant") return CodingMode::kDominant;
  if (name == "recessive") return CodingMode::kRecessive;
  throw DataError("unknown coding mode: " + name);
}

CodedGenotypes code_counts(const Eigen::MatrixXi& counts, CodingMode mode) {
  CodedGenotypes coded;
  coded.mode = mode;
  coded.values.resize(counts.rows(), counts.cols());
  for (int i = 0; i < counts.rows(); ++i) {
    for (int j = 0; j < counts.cols(); ++j) {
      const int g = counts(i, j);
      switch (mode) {
        case CodingMode::kAdditive: coded.values(i, j) = g; break;
        case CodingMode::kDominant: coded.values(i, j) = g >= 1 ? 1.0 : 0.0; break;
        case CodingMode::kRecessive: coded.values(i, j) = g == 2 ? 1.0 : 0.0; break;
      }
    }
  }
  return coded;
}

CodedGenotypes code_genotypes(const GenotypePanel& panel, CodingMode mode) {
  return code_counts(panel.counts, mode);
}

Dataset join(const GenotypePanel& panel, const SurvivalSample& sample,
             const GeneMap& gene_map) {
  std::unordered_map<std::string, int> geno_index, pheno_index;
  for (int i = 0; i < panel.n(); ++i) geno_index[panel.sample_ids[i]] = i;
  for (int i = 0; i < sample.n(); ++i) pheno_index[sample.sample_ids[i]] = i;

  std::vector<std::string> shared;
  for (const auto& [id, idx] : geno_index)
    if (pheno_index.count(id)) shared.push_back(id);
  if (shared.empty()) throw DataError("no shared sample ids between genotypes and phenotypes");
  std::sort(shared.begin(), shared.end());  // canonical order

  Dataset ds;
  for (const auto& [id, idx] : geno_index)
    if (!pheno_index.count(id)) ds.dropped_sample_ids.push_back(id);
  for (const auto& [id, idx] : pheno_index)
    if (!geno_index.count(id)) ds.dropped_sample_ids.push_back(id);
  std::sort(ds.dropped_sample_ids.begin(), ds.dropped_sample_ids.end());

  const int n = static_cast<int>(shared.size());
  Eigen::MatrixXi counts(n, panel.m());
  SurvivalSample s;
  s.sample_ids = shared;
  s.time.resize(n);
  s.event.resize(n);
  s.covariates.resize(n, sample.k());
  s.covariate_names = sample.covariate_names;
  for (int i = 0; i < n; ++i) {
    counts.row(i) = panel.counts.row(geno_index[shared[i]]);
    const int p = pheno_index[shared[i]];
    s.time[i] = sample.time[p];
    s.event[i] = sample.event[p];
    if (sample.k() > 0) s.covariates.row(i) = sample.covariates.row(p);
  }
  // MAFs are recomputed on the analysis sample.
  ds.panel = make_panel(shared, panel.snp_ids, std::move(counts));
  ds.sample = std::move(s);
  ds.genes = gene_map;

  std::unordered_map<std::string, int> snp_index;
  for (int j = 0; j < ds.panel.m(); ++j) snp_index[ds.panel.snp_ids[j]] = j;
  for (const auto& [gene, snps] : gene_map.genes) {
    std::vector<int> cols;
    for (const auto& snp : snps) {
      auto it = snp_index.find(snp);
      if (it != snp_index.end()) cols.push_back(it->second);
    }
    if (cols.empty())
      ds.unresolved_genes.push_back(gene);
    else
      ds.gene_columns[gene] = std::move(cols);
  }
  return ds;
}

}  // namespace simreg
