#include "cct/data_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "cct/rng.hpp"
#include "cct/special_functions.hpp"

namespace cct {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, delim)) out.push_back(trim(field));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

// mid-ranks over the pooled sample; also reports the tie correction term
// sum(t^3 - t) and whether any tie group exists
std::vector<double> midranks(const std::vector<double>& pooled, double* tie_term,
                             bool* has_ties) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  *tie_term = 0.0;
  *has_ties = false;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1.0) {
      *has_ties = true;
      *tie_term += t * t * t - t;
    }
    i = j + 1;
  }
  return ranks;
}

// Everything needed to turn a rank sum W into a two-sided p-value, computed
// once per gene so label permutations only pay for the rank sum itself.
struct RankTest {
  std::vector<double> ranks;
  bool exact = false;
  std::vector<double> exact_p;  // indexed by W - min_sum
  std::int64_t min_sum = 0;
  double mu = 0.0;
  double sigma = 0.0;

  double p_of(double w) const {
    if (exact) {
      const std::int64_t idx = std::llround(w) - min_sum;
      return exact_p[static_cast<std::size_t>(idx)];
    }
    if (sigma <= 0.0) return 1.0;
    const double d = std::fabs(w - mu);
    if (d <= 0.5) return 1.0;
    return std::min(1.0, 2.0 * norm_sf((d - 0.5) / sigma));
  }
};

// Exact null distribution of the rank sum of a size-nx subset of {1..N}:
// counts[s] = number of subsets with sum s, built by the usual subset-sum
// recursion. Counts stay below 2^53 for N <= 64 so doubles hold them exactly.
std::vector<double> exact_two_sided_table(std::int64_t nx, std::int64_t n,
                                          std::int64_t min_sum) {
  const std::int64_t max_sum = nx * (2 * n - nx + 1) / 2;
  const std::size_t span = static_cast<std::size_t>(max_sum - min_sum + 1);
  // dp[k][s - k(k+1)/2] over items 1..N
  std::vector<std::vector<double>> dp(static_cast<std::size_t>(nx) + 1);
  for (std::int64_t k = 0; k <= nx; ++k) {
    const std::int64_t lo = k * (k + 1) / 2;
    const std::int64_t hi = k * (2 * n - k + 1) / 2;
    dp[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(hi - lo + 1),
                                           0.0);
  }
  dp[0][0] = 1.0;
  for (std::int64_t item = 1; item <= n; ++item) {
    for (std::int64_t k = std::min(nx, item); k >= 1; --k) {
      const std::int64_t lo_k = k * (k + 1) / 2;
      const std::int64_t lo_p = (k - 1) * k / 2;
      auto& cur = dp[static_cast<std::size_t>(k)];
      const auto& prev = dp[static_cast<std::size_t>(k - 1)];
      // items processed so far are 1..item, so sums reachable with k of them
      // lie in [lo_k, k*(2*item-k+1)/2]
      const std::int64_t hi_s = k * (2 * item - k + 1) / 2;
      // transfers need from = s - item >= lo_p; lo_p + item >= lo_k since
      // item >= k, so the cur index below stays in range
      for (std::int64_t s = hi_s; s >= lo_p + item; --s) {
        const std::int64_t from = s - item;
        if (from < lo_p) break;
        const std::size_t fi = static_cast<std::size_t>(from - lo_p);
        if (fi < prev.size() && prev[fi] > 0.0) {
          cur[static_cast<std::size_t>(s - lo_k)] += prev[fi];
        }
      }
    }
  }
  const auto& counts = dp[static_cast<std::size_t>(nx)];
  double total = 0.0;
  for (double c : counts) total += c;
  // two-sided p at W = 2 * min(P(sum <= W), P(sum >= W)) capped at 1
  std::vector<double> below(span), table(span);
  double acc = 0.0;
  for (std::size_t s = 0; s < span; ++s) {
    acc += counts[s];
    below[s] = acc;
  }
  for (std::size_t s = 0; s < span; ++s) {
    const double le = below[s];
    const double ge = total - (s == 0 ? 0.0 : below[s - 1]);
    table[s] = std::min(1.0, 2.0 * std::min(le, ge) / total);
  }
  return table;
}

RankTest build_rank_test(const std::vector<double>& pooled, std::int64_t nx,
                         WilcoxonMode mode) {
  const std::int64_t n = static_cast<std::int64_t>(pooled.size());
  const std::int64_t ny = n - nx;
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("wilcoxon: both groups must be non-empty");
  }
  for (double v : pooled) {
    if (std::isnan(v)) throw std::invalid_argument("wilcoxon: NaN in data");
  }
  RankTest rt;
  double tie_term = 0.0;
  bool has_ties = false;
  rt.ranks = midranks(pooled, &tie_term, &has_ties);
  if (mode == WilcoxonMode::AUTO) {
    mode = (n <= 20 && !has_ties) ? WilcoxonMode::EXACT
                                  : WilcoxonMode::NORMAL_APPROX;
  }
  if (mode == WilcoxonMode::EXACT) {
    if (has_ties) {
      throw std::invalid_argument("wilcoxon: exact mode requires untied data");
    }
    if (n > 64) {
      throw std::invalid_argument(
          "wilcoxon: exact mode capped at 64 observations");
    }
    rt.exact = true;
    rt.min_sum = nx * (nx + 1) / 2;
    rt.exact_p = exact_two_sided_table(nx, n, rt.min_sum);
  } else {
    rt.mu = static_cast<double>(nx) * (static_cast<double>(n) + 1.0) / 2.0;
    const double nn = static_cast<double>(n);
    const double var = static_cast<double>(nx) * static_cast<double>(ny) / 12.0 *
                       ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    rt.sigma = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return rt;
}

std::uint64_t next_below(RngStream& rs, std::uint64_t bound) {
  return rs.next_u64() % bound;
}

}  // namespace

double wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y,
                         WilcoxonMode mode) {
  std::vector<double> pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  const RankTest rt =
      build_rank_test(pooled, static_cast<std::int64_t>(x.size()), mode);
  double w = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) w += rt.ranks[i];
  return rt.p_of(w);
}

ExpressionDataset load_expression(const std::string& data_path, FileFormat format,
                                  const std::string& labels_path) {
  const char delim = format == FileFormat::CSV ? ',' : '\t';
  std::ifstream in(data_path);
  if (!in) throw std::runtime_error("cannot open data file: " + data_path);

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("malformed header: empty data file");
  }
  std::vector<std::string> header = split_line(line, delim);
  if (header.size() < 2) {
    throw std::runtime_error("malformed header: need gene_id plus samples");
  }
  ExpressionDataset out;
  out.samples.assign(header.begin() + 1, header.end());
  const std::size_t ns = out.samples.size();
  {
    std::unordered_set<std::string> seen;
    for (const auto& s : out.samples) {
      if (s.empty() || !seen.insert(s).second) {
        throw std::runtime_error("malformed header: bad sample id '" + s + "'");
      }
    }
  }

  std::vector<std::vector<double>> rows;
  std::unordered_set<std::string> gene_seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_line(line, delim);
    if (fields.size() != ns + 1) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected " + std::to_string(ns + 1) +
                               " fields, got " + std::to_string(fields.size()));
    }
    const std::string& gid = fields[0];
    if (gid.empty()) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": empty gene id");
    }
    if (!gene_seen.insert(gid).second) {
      throw std::runtime_error("duplicate gene id: " + gid);
    }
    std::vector<double> vals(ns);
    bool ok = true;
    for (std::size_t j = 0; j < ns; ++j) {
      if (!parse_double(fields[j + 1], &vals[j])) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++out.dropped_rows;
      continue;
    }
    out.gene_ids.push_back(gid);
    rows.push_back(std::move(vals));
  }
  out.values.resize(static_cast<std::int64_t>(rows.size()),
                    static_cast<std::int64_t>(ns));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      out.values(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j)) =
          rows[i][j];
    }
  }

  // labels: sample_id,group with group in {CASE, CONTROL}
  std::ifstream lin(labels_path);
  if (!lin) throw std::runtime_error("cannot open labels file: " + labels_path);
  std::unordered_map<std::string, int> label;
  bool first = true;
  std::size_t lline = 0;
  while (std::getline(lin, line)) {
    ++lline;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_line(line, ',');
    if (first && fields.size() == 2 && fields[1] == "group") {
      first = false;
      continue;  // header row
    }
    first = false;
    if (fields.size() != 2) {
      throw std::runtime_error("labels line " + std::to_string(lline) +
                               ": expected sample_id,group");
    }
    int g;
    if (fields[1] == "CASE") {
      g = 0;
    } else if (fields[1] == "CONTROL") {
      g = 1;
    } else {
      throw std::runtime_error("labels line " + std::to_string(lline) +
                               ": group must be CASE or CONTROL, got '" +
                               fields[1] + "'");
    }
    if (!label.emplace(fields[0], g).second) {
      throw std::runtime_error("duplicate label for sample: " + fields[0]);
    }
  }
  for (const auto& [sid, g] : label) {
    (void)g;
    if (std::find(out.samples.begin(), out.samples.end(), sid) ==
        out.samples.end()) {
      throw std::runtime_error("unknown sample in labels file: " + sid);
    }
  }
  out.group.resize(ns);
  std::int64_t n_case = 0, n_control = 0;
  for (std::size_t j = 0; j < ns; ++j) {
    auto it = label.find(out.samples[j]);
    if (it == label.end()) {
      throw std::runtime_error("no label for sample: " + out.samples[j]);
    }
    out.group[j] = it->second;
    (it->second == 0 ? n_case : n_control) += 1;
  }
  if (n_case == 0 || n_control == 0) {
    throw std::runtime_error("labels file leaves a group empty");
  }
  return out;
}

void write_expression_csv(const ExpressionDataset& data,
                          const std::string& data_path,
                          const std::string& labels_path) {
  std::ofstream out(data_path);
  if (!out) throw std::runtime_error("cannot write data file: " + data_path);
  out << "gene_id";
  for (const auto& s : data.samples) out << ',' << s;
  out << '\n';
  char buf[40];
  for (std::int64_t i = 0; i < data.n_genes(); ++i) {
    out << data.gene_ids[static_cast<std::size_t>(i)];
    for (std::int64_t j = 0; j < data.n_samples(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.values(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  std::ofstream lab(labels_path);
  if (!lab) throw std::runtime_error("cannot write labels file: " + labels_path);
  lab << "sample_id,group\n";
  for (std::size_t j = 0; j < data.samples.size(); ++j) {
    lab << data.samples[j] << ',' << (data.group[j] == 0 ? "CASE" : "CONTROL")
        << '\n';
  }
}

std::vector<GeneSet> load_gene_sets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gene set file: " + path);
  std::vector<GeneSet> sets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_line(line, '\t');
    if (fields.size() < 2) {
      throw std::runtime_error("gene set line " + std::to_string(line_no) +
                               ": need a name and at least one gene");
    }
    GeneSet gs;
    gs.name = fields[0];
    gs.gene_ids.assign(fields.begin() + 1, fields.end());
    sets.push_back(std::move(gs));
  }
  return sets;
}

std::string PathwayReport::per_gene_csv() const {
  std::string out = "gene_id,p_value\n";
  char buf[64];
  for (std::size_t i = 0; i < gene_ids.size(); ++i) {
    std::snprintf(buf, sizeof buf, ",%.17g\n", per_gene_p[i]);
    out += gene_ids[i];
    out += buf;
  }
  return out;
}

std::string PathwayReport::to_json() const {
  nlohmann::ordered_json j;
  j["gene_set"] = gene_set;
  j["m_used"] = m_used;
  j["gene_ids"] = gene_ids;
  j["per_gene_p"] = per_gene_p;
  j["cct"] = nlohmann::ordered_json::parse(cct.to_json());
  j["minp"] = nlohmann::ordered_json::parse(minp.to_json());
  return j.dump(2);
}

PathwayReport pathway_test(const ExpressionDataset& data, const GeneSet& set,
                           WeightScheme scheme,
                           const std::vector<double>& supplied_weights,
                           std::int64_t minp_replicates, std::uint64_t seed,
                           int workers) {
  if (minp_replicates < 1) {
    throw std::invalid_argument("pathway_test: minp_replicates must be >= 1");
  }
  const std::int64_t ns = data.n_samples();
  std::int64_t n_case = 0;
  for (int g : data.group) n_case += (g == 0);
  if (n_case == 0 || n_case == ns) {
    throw std::invalid_argument("pathway_test: both groups must be non-empty");
  }

  // intersection in dataset order
  std::unordered_set<std::string> wanted(set.gene_ids.begin(),
                                         set.gene_ids.end());
  PathwayReport rep;
  rep.gene_set = set.name;
  std::vector<std::int64_t> rows;
  for (std::int64_t i = 0; i < data.n_genes(); ++i) {
    if (wanted.count(data.gene_ids[static_cast<std::size_t>(i)])) {
      rows.push_back(i);
      rep.gene_ids.push_back(data.gene_ids[static_cast<std::size_t>(i)]);
    }
  }
  rep.m_used = static_cast<std::int64_t>(rows.size());
  if (rep.m_used == 0) {
    throw std::invalid_argument("pathway_test: gene set '" + set.name +
                                "' does not intersect the dataset");
  }

  std::vector<double> weights;
  if (scheme == WeightScheme::EQUAL) {
    weights = equal_weights(rep.m_used);
  } else {
    if (supplied_weights.size() != set.gene_ids.size()) {
      throw std::invalid_argument(
          "pathway_test: supplied weights must match the gene set length");
    }
    std::unordered_map<std::string, double> by_id;
    for (std::size_t i = 0; i < set.gene_ids.size(); ++i) {
      if (!(supplied_weights[i] > 0.0)) {
        throw std::invalid_argument("pathway_test: weights must be positive");
      }
      by_id[set.gene_ids[i]] = supplied_weights[i];
    }
    double total = 0.0;
    for (const auto& gid : rep.gene_ids) total += by_id.at(gid);
    for (const auto& gid : rep.gene_ids) weights.push_back(by_id.at(gid) / total);
  }

  // per-gene rank machinery over the pooled row, so each permutation only
  // costs a rank sum per gene
  const std::int64_t m = rep.m_used;
  std::vector<RankTest> tests(static_cast<std::size_t>(m));
  for (std::int64_t g = 0; g < m; ++g) {
    std::vector<double> pooled(static_cast<std::size_t>(ns));
    // pooled order: case samples first, then control, so observed W is the
    // sum of the first n_case ranks
    std::size_t at = 0;
    for (std::int64_t j = 0; j < ns; ++j) {
      if (data.group[static_cast<std::size_t>(j)] == 0) {
        pooled[at++] = data.values(rows[static_cast<std::size_t>(g)], j);
      }
    }
    for (std::int64_t j = 0; j < ns; ++j) {
      if (data.group[static_cast<std::size_t>(j)] == 1) {
        pooled[at++] = data.values(rows[static_cast<std::size_t>(g)], j);
      }
    }
    tests[static_cast<std::size_t>(g)] =
        build_rank_test(pooled, n_case, WilcoxonMode::AUTO);
  }
  rep.per_gene_p.resize(static_cast<std::size_t>(m));
  for (std::int64_t g = 0; g < m; ++g) {
    const RankTest& rt = tests[static_cast<std::size_t>(g)];
    double w = 0.0;
    for (std::int64_t j = 0; j < n_case; ++j) {
      w += rt.ranks[static_cast<std::size_t>(j)];
    }
    rep.per_gene_p[static_cast<std::size_t>(g)] = rt.p_of(w);
  }

  rep.cct = cct_test(rep.per_gene_p, weights);

  NullSampler sampler = [&tests, ns, n_case, m](RngStream& rs) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(ns));
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(
          next_below(rs, static_cast<std::uint64_t>(i + 1)));
      std::swap(idx[i], idx[j]);
    }
    std::vector<double> p(static_cast<std::size_t>(m));
    for (std::int64_t g = 0; g < m; ++g) {
      const RankTest& rt = tests[static_cast<std::size_t>(g)];
      double w = 0.0;
      for (std::int64_t j = 0; j < n_case; ++j) {
        w += rt.ranks[idx[static_cast<std::size_t>(j)]];
      }
      p[static_cast<std::size_t>(g)] = rt.p_of(w);
    }
    return p;
  };
  rep.minp =
      minp_pvalue_mc(rep.per_gene_p, sampler, minp_replicates, seed, workers);
  return rep;
}

ExpressionDataset synth_expression_fixture(std::int64_t n_genes,
                                           std::int64_t n_case,
                                           std::int64_t n_control,
                                           std::int64_t signal_genes,
                                           double shift_lo, double shift_hi,
                                           std::uint64_t seed) {
  if (n_genes < 1 || n_case < 1 || n_control < 1 || signal_genes < 0 ||
      signal_genes > n_genes || !(shift_lo <= shift_hi)) {
    throw std::invalid_argument("synth_expression_fixture: bad arguments");
  }
  const std::int64_t ns = n_case + n_control;
  ExpressionDataset out;
  out.values.resize(n_genes, ns);
  char buf[32];
  for (std::int64_t g = 0; g < n_genes; ++g) {
    std::snprintf(buf, sizeof buf, "G%04lld", static_cast<long long>(g + 1));
    out.gene_ids.emplace_back(buf);
  }
  for (std::int64_t j = 0; j < ns; ++j) {
    std::snprintf(buf, sizeof buf, "S%03lld", static_cast<long long>(j + 1));
    out.samples.emplace_back(buf);
    out.group.push_back(j < n_case ? 0 : 1);
  }
  RngStream root(seed);
  RngStream shifts = root.fork(stream_id(stream_purpose::kFixture, 0));
  for (std::int64_t g = 0; g < n_genes; ++g) {
    RngStream rs = root.fork(
        stream_id(stream_purpose::kFixture, 1 + static_cast<std::uint64_t>(g)));
    const double delta =
        g < signal_genes
            ? shift_lo + (shift_hi - shift_lo) * shifts.next_uniform()
            : 0.0;
    for (std::int64_t j = 0; j < ns; ++j) {
      out.values(g, j) = rs.next_normal() + (j < n_case ? delta : 0.0);
    }
  }
  return out;
}

}  // namespace cct
