#include "cct/correlation_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cct/parallel.hpp"
#include "cct/special_functions.hpp"

namespace cct {

namespace {

constexpr double kEigClip = -1e-10;

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const char* corr_model_name(CorrModel m) {
  switch (m) {
    case CorrModel::EQUAL_CORR: return "equal-corr";
    case CorrModel::SPIKED_EIGEN: return "spiked";
    case CorrModel::AR1: return "ar1";
    case CorrModel::POLY_DECAY: return "poly-decay";
    case CorrModel::EXPLICIT: return "explicit";
  }
  return "?";
}

void CorrelationSpec::validate() const {
  if (m < 1) throw std::domain_error("CorrelationSpec: m must be >= 1");
  switch (model) {
    case CorrModel::EQUAL_CORR:
      if (!(std::fabs(rho) < 1.0)) {
        throw std::domain_error("EQUAL_CORR: |rho| must be < 1");
      }
      if (m > 1 && !(rho > -1.0 / static_cast<double>(m - 1))) {
        throw std::domain_error("EQUAL_CORR: rho must exceed -1/(m-1)");
      }
      break;
    case CorrModel::AR1:
      if (!(std::fabs(rho) < 1.0)) {
        throw std::domain_error("AR1: |rho| must be < 1");
      }
      break;
    case CorrModel::POLY_DECAY:
      if (!(a > 0.0)) throw std::domain_error("POLY_DECAY: a must be > 0");
      break;
    case CorrModel::SPIKED_EIGEN:
      if (!(d >= 1 && d < m)) {
        throw std::domain_error("SPIKED_EIGEN: requires 1 <= d < m");
      }
      if (!(base > 1.0)) {
        throw std::domain_error("SPIKED_EIGEN: base must be > 1");
      }
      break;
    case CorrModel::EXPLICIT:
      if (explicit_matrix.rows() != m || explicit_matrix.cols() != m) {
        throw std::domain_error("EXPLICIT: matrix must be m x m");
      }
      break;
  }
}

std::string CorrelationSpec::describe() const {
  char buf[128];
  switch (model) {
    case CorrModel::EQUAL_CORR:
      std::snprintf(buf, sizeof buf, "equal-corr(rho=%g, m=%lld)", rho,
                    static_cast<long long>(m));
      break;
    case CorrModel::SPIKED_EIGEN:
      std::snprintf(buf, sizeof buf, "spiked(d=%lld, base=%g, m=%lld)",
                    static_cast<long long>(d), base, static_cast<long long>(m));
      break;
    case CorrModel::AR1:
      std::snprintf(buf, sizeof buf, "ar1(rho=%g, m=%lld)", rho,
                    static_cast<long long>(m));
      break;
    case CorrModel::POLY_DECAY:
      std::snprintf(buf, sizeof buf, "poly-decay(a=%g, m=%lld)", a,
                    static_cast<long long>(m));
      break;
    case CorrModel::EXPLICIT:
      std::snprintf(buf, sizeof buf, "explicit(m=%lld)", static_cast<long long>(m));
      break;
  }
  return buf;
}

CorrelationSpec parse_correlation_stanza(const std::string& text) {
  CorrelationSpec spec;
  bool saw_model = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("correlation stanza: expected key = value, got '" +
                                  line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "model") {
      saw_model = true;
      if (value == "equal-corr" || value == "equal_corr") {
        spec.model = CorrModel::EQUAL_CORR;
      } else if (value == "spiked" || value == "spiked-eigen" ||
                 value == "spiked_eigen") {
        spec.model = CorrModel::SPIKED_EIGEN;
      } else if (value == "ar1") {
        spec.model = CorrModel::AR1;
      } else if (value == "poly-decay" || value == "poly_decay") {
        spec.model = CorrModel::POLY_DECAY;
      } else if (value == "explicit") {
        spec.model = CorrModel::EXPLICIT;
      } else {
        throw std::invalid_argument("correlation stanza: unknown model '" +
                                    value + "'");
      }
    } else if (key == "m") {
      spec.m = std::stoll(value);
    } else if (key == "rho") {
      spec.rho = std::stod(value);
    } else if (key == "a") {
      spec.a = std::stod(value);
    } else if (key == "d") {
      spec.d = std::stoll(value);
    } else if (key == "base") {
      spec.base = std::stod(value);
    } else if (key == "basis-seed" || key == "basis_seed") {
      spec.basis_seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "matrix") {
      spec.explicit_matrix = read_matrix_binary(value);
      spec.m = spec.explicit_matrix.rows();
    } else {
      throw std::invalid_argument("correlation stanza: unknown key '" + key + "'");
    }
  }
  if (!saw_model) {
    throw std::invalid_argument("correlation stanza: missing 'model' key");
  }
  spec.validate();
  return spec;
}

namespace {

Eigen::MatrixXd haar_orthogonal(std::int64_t m, std::uint64_t basis_seed) {
  Eigen::MatrixXd g(m, m);
  RngStream stream(basis_seed, stream_id(stream_purpose::kBasis, 0));
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = 0; j < m; ++j) g(i, j) = stream.next_normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // fix the sign convention so Q is Haar distributed rather than biased by
  // the QR sign ambiguity
  const Eigen::VectorXd diag = qr.matrixQR().diagonal();
  for (std::int64_t j = 0; j < m; ++j) {
    if (diag(j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

CorrelationMatrix build_correlation(const CorrelationSpec& spec) {
  spec.validate();
  const std::int64_t m = spec.m;
  CorrelationMatrix out;
  switch (spec.model) {
    case CorrModel::EQUAL_CORR:
      out.entries = Eigen::MatrixXd::Constant(m, m, spec.rho);
      out.entries.diagonal().setOnes();
      break;
    case CorrModel::AR1: {
      out.entries.resize(m, m);
      for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < m; ++j) {
          out.entries(i, j) = std::pow(spec.rho, std::abs(i - j));
        }
      }
      break;
    }
    case CorrModel::POLY_DECAY: {
      out.entries.resize(m, m);
      for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < m; ++j) {
          const double gap = static_cast<double>(std::abs(i - j));
          out.entries(i, j) =
              i == j ? 1.0 : 1.0 / (1.0 + std::pow(gap, spec.a));
        }
      }
      break;
    }
    case CorrModel::SPIKED_EIGEN: {
      Eigen::VectorXd lambda = Eigen::VectorXd::Ones(m);
      out.target_eigenvalues.resize(static_cast<std::size_t>(m), 1.0);
      for (std::int64_t i = 0; i < spec.d; ++i) {
        const double val = static_cast<double>(m) /
                           std::pow(spec.base, static_cast<double>(i + 1));
        lambda(i) = val;
        out.target_eigenvalues[static_cast<std::size_t>(i)] = val;
      }
      const Eigen::MatrixXd q = haar_orthogonal(m, spec.basis_seed);
      Eigen::MatrixXd sigma = q * lambda.asDiagonal() * q.transpose();
      Eigen::VectorXd dinv = sigma.diagonal().cwiseSqrt().cwiseInverse();
      out.entries = dinv.asDiagonal() * sigma * dinv.asDiagonal();
      out.entries = 0.5 * (out.entries + out.entries.transpose()).eval();
      out.entries.diagonal().setOnes();
      break;
    }
    case CorrModel::EXPLICIT: {
      const Eigen::MatrixXd& x = spec.explicit_matrix;
      if ((x - x.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::domain_error("EXPLICIT: matrix must be symmetric within 1e-12");
      }
      if ((x.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
        throw std::domain_error("EXPLICIT: diagonal must be 1 within 1e-12");
      }
      out.entries = 0.5 * (x + x.transpose());
      out.entries.diagonal().setOnes();
      break;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.entries);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("build_correlation: eigendecomposition failed");
  }
  Eigen::VectorXd ev = es.eigenvalues();  // ascending
  if (ev(0) < kEigClip) {
    throw std::domain_error("build_correlation: matrix is not PSD (eigenvalue " +
                            std::to_string(ev(0)) + ")");
  }
  out.realized_eigenvalues.assign(ev.data(), ev.data() + m);
  std::reverse(out.realized_eigenvalues.begin(), out.realized_eigenvalues.end());
  Eigen::VectorXd clipped = ev.cwiseMax(0.0).cwiseSqrt();
  out.factor = es.eigenvectors() * clipped.asDiagonal();
  return out;
}

double MeanSpec::resolve_magnitude(std::int64_t m) const {
  if (std::isnan(magnitude)) {
    return std::sqrt(2.0 * 0.6 * std::log(static_cast<double>(m)));
  }
  if (!(magnitude >= 0.0)) {
    throw std::domain_error("MeanSpec: magnitude must be >= 0");
  }
  return magnitude;
}

Eigen::VectorXd MeanSpec::build(std::int64_t m) const {
  if (m < 1) throw std::domain_error("MeanSpec: m must be >= 1");
  if (!(support_fraction >= 0.0 && support_fraction <= 1.0)) {
    throw std::domain_error("MeanSpec: support_fraction must lie in [0,1]");
  }
  const std::int64_t k = std::llround(support_fraction * static_cast<double>(m));
  const double mag = resolve_magnitude(m);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
  if (k == 0) return mu;
  if (placement == Placement::PREFIX) {
    mu.head(k).setConstant(mag);
    return mu;
  }
  // RANDOM: partial Fisher-Yates over the index set, seeded
  std::vector<std::int64_t> idx(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
  RngStream stream(placement_seed, stream_id(stream_purpose::kPlacement, 0));
  for (std::int64_t i = 0; i < k; ++i) {
    const std::int64_t j =
        i + static_cast<std::int64_t>(stream.next_u64() %
                                      static_cast<std::uint64_t>(m - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    mu(idx[static_cast<std::size_t>(i)]) = mag;
  }
  return mu;
}

Eigen::MatrixXd mvn_sample(const CorrelationMatrix& R, const Eigen::VectorXd& mu,
                           std::int64_t n, const RngStream& stream, int workers) {
  const std::int64_t m = R.size();
  if (R.factor.rows() != m || R.factor.cols() != m) {
    throw std::invalid_argument("mvn_sample: factor not cached");
  }
  if (mu.size() != m) throw std::invalid_argument("mvn_sample: mu length mismatch");
  if (n < 0) throw std::invalid_argument("mvn_sample: n must be >= 0");

  Eigen::MatrixXd out(n, m);
  const Eigen::MatrixXd lt = R.factor.transpose();
  constexpr std::int64_t kBlock = 256;
  parallel_chunks(n, workers, [&](std::int64_t b, std::int64_t e, int) {
    Eigen::MatrixXd g(kBlock, m);
    for (std::int64_t start = b; start < e; start += kBlock) {
      const std::int64_t rows = std::min(kBlock, e - start);
      for (std::int64_t i = 0; i < rows; ++i) {
        RngStream rs = stream.fork(
            stream_id(stream_purpose::kMvnRow,
                      static_cast<std::uint64_t>(start + i)));
        for (std::int64_t j = 0; j < m; ++j) g(i, j) = rs.next_normal();
      }
      out.middleRows(start, rows).noalias() = g.topRows(rows) * lt;
      out.middleRows(start, rows).rowwise() += mu.transpose();
    }
  });
  return out;
}

std::vector<double> z_to_pvalues(const std::vector<double>& z) {
  std::vector<double> p;
  p.reserve(z.size());
  for (double x : z) {
    if (std::isnan(x)) throw std::invalid_argument("z_to_pvalues: NaN input");
    const double val = erfc_cody(std::fabs(x) / 1.41421356237309504880);
    p.push_back(std::clamp(val, 1e-300, 1.0 - 1e-16));
  }
  return p;
}

Eigen::VectorXd z_to_pvalues(const Eigen::VectorXd& z) {
  Eigen::VectorXd p(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double val = erfc_cody(std::fabs(z(i)) / 1.41421356237309504880);
    p(i) = std::clamp(val, 1e-300, 1.0 - 1e-16);
  }
  return p;
}

std::vector<double> varrho_profile(const CorrelationMatrix& R, std::int64_t k_max) {
  const std::int64_t m = R.size();
  if (!(k_max >= 1 && k_max < m)) {
    throw std::invalid_argument("varrho_profile: requires 1 <= k_max < m");
  }
  // max |R_ij| per off-diagonal distance, then suffix max for the sup over
  // |i-j| >= k
  std::vector<double> band(static_cast<std::size_t>(m), 0.0);
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = i + 1; j < m; ++j) {
      const std::size_t gap = static_cast<std::size_t>(j - i);
      band[gap] = std::max(band[gap], std::fabs(R.entries(i, j)));
    }
  }
  for (std::int64_t g = m - 2; g >= 1; --g) {
    band[static_cast<std::size_t>(g)] = std::max(
        band[static_cast<std::size_t>(g)], band[static_cast<std::size_t>(g + 1)]);
  }
  return std::vector<double>(band.begin() + 1,
                             band.begin() + 1 + static_cast<std::ptrdiff_t>(k_max));
}

std::vector<double> varrho_diagnostic(const std::vector<double>& profile, double s) {
  if (!(s > 0.0)) throw std::domain_error("varrho_diagnostic: s must be > 0");
  std::vector<double> out(profile.size());
  for (std::size_t k = 0; k < profile.size(); ++k) {
    const double logk = std::log(static_cast<double>(k + 1));
    out[k] = profile[k] * std::pow(logk, 2.0 + s);
  }
  return out;
}

void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& mat) {
  if (mat.rows() != mat.cols()) {
    throw std::invalid_argument("write_matrix_binary: matrix must be square");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_matrix_binary: cannot open " + path);
  const std::int64_t m = mat.rows();
  out.write(reinterpret_cast<const char*>(&m), sizeof m);
  std::vector<double> row(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = 0; j < m; ++j) row[static_cast<std::size_t>(j)] = mat(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double) * row.size()));
  }
  if (!out) throw std::runtime_error("write_matrix_binary: write failed: " + path);
}

Eigen::MatrixXd read_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_matrix_binary: cannot open " + path);
  std::int64_t m = 0;
  in.read(reinterpret_cast<char*>(&m), sizeof m);
  if (!in || m < 1 || m > 100000) {
    throw std::runtime_error("read_matrix_binary: bad header in " + path);
  }
  Eigen::MatrixXd mat(m, m);
  std::vector<double> row(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * row.size()));
    if (!in) throw std::runtime_error("read_matrix_binary: truncated file " + path);
    for (std::int64_t j = 0; j < m; ++j) mat(i, j) = row[static_cast<std::size_t>(j)];
  }
  return mat;
}

}  // namespace cct
