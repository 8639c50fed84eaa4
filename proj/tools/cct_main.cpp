// Command line front end: tail calibration, size and power studies, copula
// decay certificates, the pathway pipeline, and one-shot p-value combination.
// Every stochastic command takes an explicit --seed and writes a manifest
// next to its artifact; timing lives only in the manifest so artifacts are
// byte-identical across reruns and worker counts.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "cct/combiners.hpp"
#include "cct/copulas.hpp"
#include "cct/correlation_models.hpp"
#include "cct/data_pipeline.hpp"
#include "cct/simulation.hpp"
#include "cct/special_functions.hpp"
#include "cct/version.hpp"

namespace {

using nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_manifest(const std::string& output, const std::string& command,
                    const ordered_json& config, double wall_seconds,
                    const std::uint64_t* seed) {
  ordered_json j;
  j["command"] = command;
  j["config"] = config;
  j["library_version"] = cct::kLibraryVersion;
  if (seed != nullptr) j["seed"] = *seed;
  j["wall_time_seconds"] = wall_seconds;
  write_text(output + ".manifest.json", j.dump(2) + "\n");
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Shared scenario flags. model "mixed" pairs --family/--theta; the others
// map onto the correlation models.
struct ScenarioFlags {
  std::string model;
  std::int64_t m = 10;
  double rho = 0.0;
  double a = 1.0;
  std::int64_t d = 1;
  double base = 3.0;
  std::uint64_t basis_seed = 0;
  std::string family;
  double theta = 0.0;

  void add_options(CLI::App* cmd, bool allow_mixed) {
    std::string models = "equal-corr|spiked|ar1|poly-decay";
    if (allow_mixed) models += "|mixed";
    cmd->add_option("--model", model, "scenario model: " + models)->required();
    cmd->add_option("--m", m, "number of tests")->capture_default_str();
    cmd->add_option("--rho", rho, "correlation (equal-corr, ar1)")
        ->capture_default_str();
    cmd->add_option("--a", a, "poly-decay exponent")->capture_default_str();
    cmd->add_option("--d", d, "spiked model spike count")->capture_default_str();
    cmd->add_option("--base", base, "spiked model eigenvalue ratio")
        ->capture_default_str();
    cmd->add_option("--basis-seed", basis_seed, "spiked model basis seed")
        ->capture_default_str();
    if (allow_mixed) {
      cmd->add_option("--family", family,
                      "copula family for the mixed model "
                      "(product|fgm|cuadras-auge|normal|amh|survival)");
      cmd->add_option("--theta", theta, "copula parameter")
          ->capture_default_str();
    }
  }

  cct::CorrelationSpec corr_spec() const {
    cct::CorrelationSpec spec;
    if (model == "equal-corr") {
      spec.model = cct::CorrModel::EQUAL_CORR;
    } else if (model == "spiked") {
      spec.model = cct::CorrModel::SPIKED_EIGEN;
    } else if (model == "ar1") {
      spec.model = cct::CorrModel::AR1;
    } else if (model == "poly-decay") {
      spec.model = cct::CorrModel::POLY_DECAY;
    } else {
      throw std::invalid_argument("unknown model: " + model);
    }
    spec.m = m;
    spec.rho = rho;
    spec.a = a;
    spec.d = d;
    spec.base = base;
    spec.basis_seed = basis_seed;
    return spec;
  }

  cct::Scenario build() const {
    if (model == "mixed") {
      if (family.empty()) {
        throw std::invalid_argument("mixed model needs --family");
      }
      cct::CopulaSpec cop;
      cop.family = cct::copula_family_from_name(family);
      cop.theta = theta;
      return cct::Scenario::mixed_copula(cop, m);
    }
    return cct::Scenario::correlated_normal(corr_spec());
  }

  ordered_json config() const {
    ordered_json j;
    j["model"] = model;
    j["m"] = m;
    if (model == "equal-corr" || model == "ar1") j["rho"] = rho;
    if (model == "poly-decay") j["a"] = a;
    if (model == "spiked") {
      j["d"] = d;
      j["base"] = base;
      j["basis_seed"] = basis_seed;
    }
    if (model == "mixed") {
      j["family"] = family;
      j["theta"] = theta;
    }
    return j;
  }
};

std::vector<double> read_pvalue_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open p-value file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    lines.push_back(line);
  }
  auto parse = [](const std::string& s, double* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    *out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
  };
  // CSV mode when the first non-blank line is a header with a column "p"
  std::size_t first = 0;
  while (first < lines.size() && lines[first].empty()) ++first;
  if (first == lines.size()) {
    throw std::invalid_argument("p-value file is empty: " + path);
  }
  std::ptrdiff_t pcol = -1;
  {
    std::vector<std::string> fields;
    std::string f;
    std::istringstream is(lines[first]);
    while (std::getline(is, f, ',')) fields.push_back(f);
    double dummy;
    if (fields.size() > 1 || !parse(fields.empty() ? "" : fields[0], &dummy)) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "p") pcol = static_cast<std::ptrdiff_t>(i);
      }
      if (fields.size() > 1 && pcol < 0) {
        throw std::invalid_argument("no column named 'p' in " + path);
      }
    }
  }
  std::vector<double> p;
  for (std::size_t i = (pcol >= 0 ? first + 1 : first); i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::string cell = lines[i];
    if (pcol >= 0) {
      std::vector<std::string> fields;
      std::string f;
      std::istringstream is(lines[i]);
      while (std::getline(is, f, ',')) fields.push_back(f);
      if (static_cast<std::size_t>(pcol) >= fields.size()) {
        throw std::invalid_argument("line " + std::to_string(i + 1) +
                                    ": missing 'p' column");
      }
      cell = fields[static_cast<std::size_t>(pcol)];
    }
    double v;
    if (!parse(cell, &v)) {
      throw std::invalid_argument("line " + std::to_string(i + 1) +
                                  ": cannot parse p-value '" + cell + "'");
    }
    p.push_back(v);
  }
  if (p.empty()) throw std::invalid_argument("no p-values in " + path);
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cauchy combination testing toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key=value config file; command line flags take precedence");

  // ---- calibrate-tail ----
  auto* tail = app.add_subcommand(
      "calibrate-tail", "empirical CCT tail vs the standard Cauchy reference");
  ScenarioFlags tail_sf;
  tail_sf.add_options(tail, /*allow_mixed=*/true);
  std::int64_t tail_reps = 100000;
  std::uint64_t tail_seed = 0;
  int tail_workers = 1;
  double tail_tmax = 1000.0;
  int tail_tpoints = 40;
  std::string tail_output;
  tail->add_option("--replicates", tail_reps, "Monte Carlo replicates")
      ->capture_default_str();
  tail->add_option("--seed", tail_seed, "RNG seed")->required();
  tail->add_option("--workers", tail_workers, "worker threads")
      ->envname("CCT_WORKERS")
      ->capture_default_str();
  tail->add_option("--t-max", tail_tmax, "largest t in the grid")
      ->capture_default_str();
  tail->add_option("--t-points", tail_tpoints, "grid size")
      ->capture_default_str();
  tail->add_option("--output", tail_output, "artifact path (.json for JSON)")
      ->required();
  tail->callback([&]() {
    Timer timer;
    const cct::Scenario sc = tail_sf.build();
    std::vector<double> grid;
    if (tail_tmax == 1000.0 && tail_tpoints == 40) {
      grid = cct::default_t_grid();
    } else {
      if (tail_tpoints < 2 || tail_tmax <= cct::cauchy_quantile(0.95)) {
        throw std::invalid_argument("bad t grid");
      }
      const double l0 = std::log(cct::cauchy_quantile(0.95));
      const double l1 = std::log(tail_tmax);
      for (int i = 0; i < tail_tpoints; ++i) {
        grid.push_back(std::exp(l0 + (l1 - l0) * i / (tail_tpoints - 1)));
      }
    }
    const cct::TailCalibration cal =
        cct::tail_calibration(sc, tail_reps, tail_seed, tail_workers, grid);
    const std::string body =
        ends_with(tail_output, ".json") ? cal.to_json() + "\n" : cal.to_csv();
    write_text(tail_output, body);
    ordered_json cfg = tail_sf.config();
    cfg["replicates"] = tail_reps;
    cfg["workers"] = tail_workers;
    cfg["t_max"] = tail_tmax;
    cfg["t_points"] = tail_tpoints;
    write_manifest(tail_output, "calibrate-tail", cfg, timer.seconds(),
                   &tail_seed);
    std::printf("wrote %s (%lld replicates, %zu grid points)\n",
                tail_output.c_str(), static_cast<long long>(tail_reps),
                grid.size());
  });

  // ---- size ----
  auto* size_cmd = app.add_subcommand(
      "size", "empirical size of the analytic CCT test at a given level");
  ScenarioFlags size_sf;
  size_sf.add_options(size_cmd, /*allow_mixed=*/true);
  double size_alpha = 0.05;
  std::int64_t size_reps = 100000;
  std::uint64_t size_seed = 0;
  int size_workers = 1;
  std::string size_output;
  size_cmd->add_option("--alpha", size_alpha, "nominal level")
      ->capture_default_str();
  size_cmd->add_option("--replicates", size_reps, "Monte Carlo replicates")
      ->capture_default_str();
  size_cmd->add_option("--seed", size_seed, "RNG seed")->required();
  size_cmd->add_option("--workers", size_workers, "worker threads")
      ->envname("CCT_WORKERS")
      ->capture_default_str();
  size_cmd->add_option("--output", size_output, "artifact path")->required();
  size_cmd->callback([&]() {
    Timer timer;
    const cct::Scenario sc = size_sf.build();
    const double size =
        cct::size_check(sc, size_alpha, size_reps, size_seed, size_workers);
    ordered_json out;
    out["scenario"] = sc.describe();
    out["alpha"] = size_alpha;
    out["replicates"] = size_reps;
    out["seed"] = size_seed;
    out["size"] = size;
    out["mc_stderr"] =
        std::sqrt(size * (1.0 - size) / static_cast<double>(size_reps));
    write_text(size_output, out.dump(2) + "\n");
    ordered_json cfg = size_sf.config();
    cfg["alpha"] = size_alpha;
    cfg["replicates"] = size_reps;
    cfg["workers"] = size_workers;
    write_manifest(size_output, "size", cfg, timer.seconds(), &size_seed);
    std::printf("size %.6f at alpha %g (%s)\n", size, size_alpha,
                sc.describe().c_str());
  });

  // ---- power ----
  auto* power = app.add_subcommand(
      "power", "CCT vs MAX power across a grid of test counts");
  ScenarioFlags power_sf;
  power_sf.add_options(power, /*allow_mixed=*/false);
  std::vector<std::int64_t> power_mgrid = {1000, 1200, 1500};
  double power_alpha = 0.05;
  std::int64_t power_reps = 5000;
  double power_support = 0.1;
  double power_magnitude = std::numeric_limits<double>::quiet_NaN();
  std::string power_placement = "prefix";
  std::uint64_t power_placement_seed = 0;
  bool power_mc_max = false;
  std::uint64_t power_seed = 0;
  int power_workers = 1;
  std::string power_output;
  power->add_option("--m-grid", power_mgrid, "comma separated test counts")
      ->delimiter(',')
      ->capture_default_str();
  power->add_option("--alpha", power_alpha, "nominal level")
      ->capture_default_str();
  power->add_option("--replicates", power_reps, "Monte Carlo replicates per m")
      ->capture_default_str();
  power->add_option("--support", power_support,
                    "fraction of coordinates with nonzero mean")
      ->capture_default_str();
  power->add_option("--magnitude", power_magnitude,
                    "mean magnitude (omit to auto-tune toward power 0.5)");
  power->add_option("--placement", power_placement, "prefix|random")
      ->capture_default_str();
  power->add_option("--placement-seed", power_placement_seed,
                    "seed for random placement")
      ->capture_default_str();
  power->add_flag("--mc-max", power_mc_max,
                  "calibrate the MAX threshold by Monte Carlo instead of the "
                  "Gumbel approximation");
  power->add_option("--seed", power_seed, "RNG seed")->required();
  power->add_option("--workers", power_workers, "worker threads")
      ->envname("CCT_WORKERS")
      ->capture_default_str();
  power->add_option("--output", power_output, "artifact path (.json for JSON)")
      ->required();
  power->callback([&]() {
    Timer timer;
    cct::CorrelationSpec corr = power_sf.corr_spec();
    cct::MeanSpec mean;
    mean.support_fraction = power_support;
    mean.magnitude = power_magnitude;
    if (power_placement == "prefix") {
      mean.placement = cct::Placement::PREFIX;
    } else if (power_placement == "random") {
      mean.placement = cct::Placement::RANDOM;
    } else {
      throw std::invalid_argument("placement must be prefix or random");
    }
    mean.placement_seed = power_placement_seed;
    const cct::PowerResult res =
        cct::power_study(corr, mean, power_mgrid, power_alpha, power_reps,
                         power_seed, power_workers, power_mc_max);
    const std::string body =
        ends_with(power_output, ".json") ? res.to_json() + "\n" : res.to_csv();
    write_text(power_output, body);
    ordered_json cfg = power_sf.config();
    cfg.erase("m");
    cfg["m_grid"] = power_mgrid;
    cfg["alpha"] = power_alpha;
    cfg["replicates"] = power_reps;
    cfg["support"] = power_support;
    if (!std::isnan(power_magnitude)) cfg["magnitude"] = power_magnitude;
    cfg["placement"] = power_placement;
    cfg["placement_seed"] = power_placement_seed;
    cfg["mc_max"] = power_mc_max;
    cfg["workers"] = power_workers;
    write_manifest(power_output, "power", cfg, timer.seconds(), &power_seed);
    for (std::size_t i = 0; i < res.m_grid.size(); ++i) {
      std::printf("m=%lld cct=%.4f max=%.4f (se %.4f)\n",
                  static_cast<long long>(res.m_grid[i]), res.power_cct[i],
                  res.power_max[i], res.stderr_joint[i]);
    }
  });

  // ---- check-copula ----
  auto* check = app.add_subcommand(
      "check-copula", "decay certificate for the joint/cross tail events");
  std::string check_family;
  double check_theta = 0.0;
  std::string check_regime = "fixed";
  std::int64_t check_m = 10;
  double check_gamma = 0.5;
  double check_beta = std::numeric_limits<double>::quiet_NaN();
  double check_wi = std::numeric_limits<double>::quiet_NaN();
  double check_wj = std::numeric_limits<double>::quiet_NaN();
  double check_tmin = 1e2, check_tmax = 1e6;
  int check_tpoints = 5;
  std::string check_output;
  check->add_option("--family", check_family,
                    "product|fgm|cuadras-auge|normal|amh|survival")
      ->required();
  check->add_option("--theta", check_theta,
                    "copula parameter (correlation for normal)")
      ->capture_default_str();
  check->add_option("--regime", check_regime, "fixed|divergent")
      ->capture_default_str();
  check->add_option("--m", check_m, "test count (fixed regime)")
      ->capture_default_str();
  check->add_option("--gamma", check_gamma, "growth exponent (divergent)")
      ->capture_default_str();
  check->add_option("--beta", check_beta,
                    "normal family tail exponent (default (1+|rho|)/2)");
  check->add_option("--wi", check_wi,
                    "weight of test i (fixed default 1/m, divergent 0.1)");
  check->add_option("--wj", check_wj, "weight of test j");
  check->add_option("--t-min", check_tmin, "grid start")->capture_default_str();
  check->add_option("--t-max", check_tmax, "grid end")->capture_default_str();
  check->add_option("--t-points", check_tpoints, "grid size")
      ->capture_default_str();
  check->add_option("--output", check_output, "artifact path")->required();
  check->callback([&]() {
    Timer timer;
    cct::CopulaSpec spec;
    spec.family = cct::copula_family_from_name(check_family);
    spec.theta = check_theta;
    cct::MRule rule;
    if (check_regime == "fixed") {
      rule = cct::MRule::fixed(check_m);
    } else if (check_regime == "divergent") {
      rule = cct::MRule::divergent(check_gamma);
    } else {
      throw std::invalid_argument("regime must be fixed or divergent");
    }
    rule.beta = check_beta;
    const double def_w = check_regime == "fixed"
                             ? 1.0 / static_cast<double>(check_m)
                             : 0.1;
    const double wi = std::isnan(check_wi) ? def_w : check_wi;
    const double wj = std::isnan(check_wj) ? def_w : check_wj;
    if (check_tpoints < 2 || !(check_tmin > 1.0) || !(check_tmax > check_tmin)) {
      throw std::invalid_argument("bad t grid");
    }
    std::vector<double> grid;
    const double l0 = std::log(check_tmin), l1 = std::log(check_tmax);
    for (int i = 0; i < check_tpoints; ++i) {
      grid.push_back(std::exp(l0 + (l1 - l0) * i / (check_tpoints - 1)));
    }
    const cct::DecayReport rep = cct::condition_decay_check(spec, wi, wj, rule, grid);
    write_text(check_output, rep.to_csv());
    ordered_json cfg;
    cfg["family"] = check_family;
    cfg["theta"] = check_theta;
    cfg["regime"] = check_regime;
    if (check_regime == "fixed") cfg["m"] = check_m;
    if (check_regime == "divergent") cfg["gamma"] = rep.gamma;
    if (!std::isnan(check_beta)) cfg["beta"] = check_beta;
    cfg["wi"] = wi;
    cfg["wj"] = wj;
    cfg["delta_schedule"] = rep.delta_schedule;
    write_manifest(check_output, "check-copula", cfg, timer.seconds(), nullptr);
    std::printf("joint scaled sequence %s, cross scaled sequence %s\n",
                rep.joint_strictly_decreasing() ? "strictly decreasing"
                                                : "NOT decreasing",
                rep.cross_strictly_decreasing() ? "strictly decreasing"
                                                : "NOT decreasing");
  });

  // ---- analyze ----
  auto* analyze = app.add_subcommand(
      "analyze", "pathway pipeline: per-gene rank-sum p-values combined by "
                 "CCT and permutation min-p");
  std::string an_data, an_labels, an_sets, an_set, an_format = "csv";
  std::int64_t an_minp = 2000;
  std::uint64_t an_seed = 0;
  int an_workers = 1;
  std::string an_output, an_per_gene;
  analyze->add_option("--data", an_data, "expression matrix file")->required();
  analyze->add_option("--labels", an_labels, "sample_id,group labels file")
      ->required();
  analyze->add_option("--format", an_format, "csv|tsv")->capture_default_str();
  analyze->add_option("--sets", an_sets, "gene set file (name TAB genes...)")
      ->required();
  analyze->add_option("--set", an_set, "analyze only the named gene set");
  analyze->add_option("--minp-replicates", an_minp, "permutation replicates")
      ->capture_default_str();
  analyze->add_option("--seed", an_seed, "RNG seed")->required();
  analyze->add_option("--workers", an_workers, "worker threads")
      ->envname("CCT_WORKERS")
      ->capture_default_str();
  analyze->add_option("--output", an_output, "JSON report path")->required();
  analyze->add_option("--per-gene", an_per_gene,
                      "per-gene CSV path (single-set runs only)");
  analyze->callback([&]() {
    Timer timer;
    cct::FileFormat fmt;
    if (an_format == "csv") {
      fmt = cct::FileFormat::CSV;
    } else if (an_format == "tsv") {
      fmt = cct::FileFormat::TSV;
    } else {
      throw std::invalid_argument("format must be csv or tsv");
    }
    const cct::ExpressionDataset data =
        cct::load_expression(an_data, fmt, an_labels);
    if (data.dropped_rows > 0) {
      std::fprintf(stderr, "warning: dropped %lld non-numeric rows\n",
                   static_cast<long long>(data.dropped_rows));
    }
    std::vector<cct::GeneSet> sets = cct::load_gene_sets(an_sets);
    if (!an_set.empty()) {
      std::vector<cct::GeneSet> filtered;
      for (auto& gs : sets) {
        if (gs.name == an_set) filtered.push_back(std::move(gs));
      }
      if (filtered.empty()) {
        throw std::invalid_argument("no gene set named '" + an_set + "'");
      }
      sets = std::move(filtered);
    }
    ordered_json arr = ordered_json::array();
    std::vector<cct::PathwayReport> reports;
    for (const auto& gs : sets) {
      reports.push_back(cct::pathway_test(data, gs, cct::WeightScheme::EQUAL, {},
                                          an_minp, an_seed, an_workers));
      arr.push_back(ordered_json::parse(reports.back().to_json()));
    }
    write_text(an_output, arr.dump(2) + "\n");
    if (!an_per_gene.empty()) {
      if (reports.size() != 1) {
        throw std::invalid_argument("--per-gene needs exactly one gene set");
      }
      write_text(an_per_gene, reports.front().per_gene_csv());
    }
    ordered_json cfg;
    cfg["data"] = an_data;
    cfg["labels"] = an_labels;
    cfg["format"] = an_format;
    cfg["sets"] = an_sets;
    if (!an_set.empty()) cfg["set"] = an_set;
    cfg["minp_replicates"] = an_minp;
    cfg["workers"] = an_workers;
    write_manifest(an_output, "analyze", cfg, timer.seconds(), &an_seed);
    for (const auto& rep : reports) {
      std::printf("%s: m=%lld cct_p=%.6g minp_p=%.6g\n", rep.gene_set.c_str(),
                  static_cast<long long>(rep.m_used), rep.cct.p_value,
                  rep.minp.p_value);
    }
  });

  // ---- combine ----
  auto* combine = app.add_subcommand(
      "combine", "combine a file of p-values with a chosen method");
  std::string cb_input, cb_method = "cct", cb_output;
  combine->add_option("--input", cb_input,
                      "p-value file (one per line, or CSV with a 'p' column)")
      ->required();
  combine->add_option("--method", cb_method,
                      "cct|fisher|pearson|stouffer|edgington")
      ->capture_default_str();
  combine->add_option("--output", cb_output,
                      "artifact path (default: print to stdout)");
  combine->callback([&]() {
    Timer timer;
    const std::vector<double> p = read_pvalue_file(cb_input);
    cct::TestOutcome outcome;
    if (cb_method == "cct") {
      outcome = cct::cct_test(p, cct::equal_weights(
                                     static_cast<std::int64_t>(p.size())));
    } else if (cb_method == "fisher") {
      outcome = cct::fisher(p);
    } else if (cb_method == "pearson") {
      outcome = cct::pearson_combine(p);
    } else if (cb_method == "stouffer") {
      outcome = cct::stouffer(p);
    } else if (cb_method == "edgington") {
      outcome = cct::edgington(p);
    } else {
      throw std::invalid_argument("unknown method: " + cb_method);
    }
    if (outcome.boundary_warning) {
      std::fprintf(stderr,
                   "warning: p-values at 0 or 1 were clamped to the working "
                   "range before combining\n");
    }
    const std::string body = outcome.to_json() + "\n";
    if (cb_output.empty()) {
      std::fputs(body.c_str(), stdout);
    } else {
      write_text(cb_output, body);
      ordered_json cfg;
      cfg["input"] = cb_input;
      cfg["method"] = cb_method;
      cfg["n_pvalues"] = p.size();
      write_manifest(cb_output, "combine", cfg, timer.seconds(), nullptr);
      std::printf("%s p-value %.17g (statistic %.17g, %zu inputs)\n",
                  cb_method.c_str(), outcome.p_value, outcome.statistic,
                  p.size());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
