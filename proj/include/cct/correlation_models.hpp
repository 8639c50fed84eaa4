#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cct/rng.hpp"

// Correlation matrix constructions for the simulation studies, multivariate
// normal sampling, Z-to-p conversion, and the dependence-decay diagnostic.

namespace cct {

enum class CorrModel { EQUAL_CORR, SPIKED_EIGEN, AR1, POLY_DECAY, EXPLICIT };

const char* corr_model_name(CorrModel m);

struct CorrelationSpec {
  CorrModel model = CorrModel::EQUAL_CORR;
  std::int64_t m = 1;
  double rho = 0.0;              // EQUAL_CORR, AR1
  double a = 1.0;                // POLY_DECAY exponent
  std::int64_t d = 1;            // SPIKED_EIGEN spike count
  double base = 3.0;             // SPIKED_EIGEN eigenvalue ratio
  std::uint64_t basis_seed = 0;  // SPIKED_EIGEN Haar basis seed
  Eigen::MatrixXd explicit_matrix;

  // EQUAL_CORR requires |rho| < 1 and rho > -1/(m-1); AR1 requires |rho| < 1;
  // POLY_DECAY requires a > 0; SPIKED_EIGEN requires 1 <= d < m.
  void validate() const;
  std::string describe() const;
};

// Parse a "key = value" stanza. Recognized keys: model (equal-corr, spiked,
// ar1, poly-decay, explicit), m, rho, a, d, base, basis-seed, matrix (path to
// a binary matrix file for the explicit model). '#' starts a comment.
CorrelationSpec parse_correlation_stanza(const std::string& text);

struct CorrelationMatrix {
  Eigen::MatrixXd entries;
  // factor L with L L^T = entries, from the symmetric eigendecomposition
  // with negative eigenvalues clipped at -1e-10 -> 0 (spiked and high-m
  // matrices sit too close to singular for a strict Cholesky)
  Eigen::MatrixXd factor;
  std::vector<double> target_eigenvalues;    // SPIKED_EIGEN recipe, descending
  std::vector<double> realized_eigenvalues;  // eigenvalues of entries, descending
  std::int64_t size() const { return entries.rows(); }
};

CorrelationMatrix build_correlation(const CorrelationSpec& spec);

enum class Placement { PREFIX, RANDOM };

// Sparse mean vector: round(support_fraction * m) coordinates set to
// magnitude, the rest zero. A NaN magnitude means the default level
// sqrt(2 * 0.6 * log m). RANDOM placement draws the support from
// placement_seed; PREFIX puts it on the first coordinates.
struct MeanSpec {
  double support_fraction = 0.0;
  double magnitude = std::numeric_limits<double>::quiet_NaN();
  Placement placement = Placement::PREFIX;
  std::uint64_t placement_seed = 0;

  double resolve_magnitude(std::int64_t m) const;
  Eigen::VectorXd build(std::int64_t m) const;
};

// n iid rows of N(mu, R). Row i is generated from stream.fork(row id i), so
// the output is bit-identical for any worker count and any row partition.
Eigen::MatrixXd mvn_sample(const CorrelationMatrix& R, const Eigen::VectorXd& mu,
                           std::int64_t n, const RngStream& stream,
                           int workers = 1);

// Two-sided normal p-values 2(1 - Phi(|z|)), clamped into the combiners'
// working range [1e-300, 1 - 1e-16] (so z = 0 maps to 1 - 1e-16).
std::vector<double> z_to_pvalues(const std::vector<double>& z);
Eigen::VectorXd z_to_pvalues(const Eigen::VectorXd& z);

// Dependence decay profile rho_k = max_{|i-j| >= k} |R_ij| for k = 1..k_max,
// nonincreasing by construction. Requires k_max < m.
std::vector<double> varrho_profile(const CorrelationMatrix& R, std::int64_t k_max);
// Companion diagnostic rho_k * (log k)^{2+s} for a configurable s > 0 (the
// sequence must vanish for the max-type calibration to be trustworthy).
std::vector<double> varrho_diagnostic(const std::vector<double>& profile, double s);

// Dense binary matrix format: int64 little-endian dimension m, then m*m
// row-major float64 entries.
void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& mat);
Eigen::MatrixXd read_matrix_binary(const std::string& path);

}  // namespace cct
