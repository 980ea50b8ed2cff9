#include "lse/sensing.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "lse/random.hpp"

static_assert(std::endian::native == std::endian::little,
              "operator dump format assumes a little-endian host");

namespace lse {

namespace {

constexpr char kOperatorMagic[8] = {'L', 'S', 'E', 'S', 'O', 'P', '0', '1'};

// Start-vector seed for the power iteration; fixed so estimates are
// reproducible.
constexpr std::uint64_t kPowerIterationSeed = 0x6c73652d706f7731ULL;

}  // namespace

SensingOperator::SensingOperator(Eigen::MatrixXd entries, std::uint64_t seed)
    : entries_(std::move(entries)), seed_(seed) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw std::invalid_argument("SensingOperator: k and p must be >= 1");
  }
  if (!entries_.allFinite()) {
    throw std::invalid_argument("SensingOperator: entries must be finite");
  }
}

Eigen::VectorXd SensingOperator::apply(const Eigen::VectorXd& x) const {
  if (x.size() != dimension()) {
    throw std::invalid_argument("SensingOperator::apply: expected length " +
                                std::to_string(dimension()) + ", got " +
                                std::to_string(x.size()));
  }
  return entries_ * x;
}

Eigen::VectorXd SensingOperator::apply_adjoint(const Eigen::VectorXd& v) const {
  if (v.size() != measurements()) {
    throw std::invalid_argument(
        "SensingOperator::apply_adjoint: expected length " +
        std::to_string(measurements()) + ", got " + std::to_string(v.size()));
  }
  return entries_.transpose() * v;
}

double SensingOperator::lipschitz() const {
  if (!lipschitz_) {
    estimate_lipschitz(*this);
  }
  return *lipschitz_;
}

SensingOperator generate_gaussian_operator(Eigen::Index k, Eigen::Index p,
                                           std::uint64_t seed) {
  if (k < 1 || p < 1) {
    throw std::invalid_argument("generate_gaussian_operator: k, p must be >= 1");
  }
  NormalSampler normal(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  Eigen::MatrixXd entries(k, p);
  for (Eigen::Index i = 0; i < k; ++i) {    // row-major fill, matching the
    for (Eigen::Index j = 0; j < p; ++j) {  // dump format
      entries(i, j) = scale * normal.next();
    }
  }
  return SensingOperator(std::move(entries), seed);
}

MeasurementSet measure(const SensingOperator& op, const Eigen::VectorXd& x,
                       double sigma, std::uint64_t seed) {
  if (x.size() != op.dimension()) {
    throw std::invalid_argument("measure: signal length " +
                                std::to_string(x.size()) +
                                " does not match operator dimension " +
                                std::to_string(op.dimension()));
  }
  if (std::isnan(sigma) || sigma < 0.0) {
    throw std::invalid_argument("measure: sigma must be >= 0");
  }
  Eigen::VectorXd y = op.apply(x);
  if (sigma > 0.0) {
    NormalSampler normal(seed);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y[i] += sigma * normal.next();
    }
  }
  return MeasurementSet{std::move(y), sigma, seed};
}

Eigen::VectorXd proxy_observations(const SensingOperator& op,
                                   const MeasurementSet& meas) {
  return op.apply_adjoint(meas.y);
}

LipschitzEstimate estimate_lipschitz(const SensingOperator& op, double tol,
                                     int max_iters) {
  if (tol <= 0.0) {
    throw std::invalid_argument("estimate_lipschitz: tol must be > 0");
  }
  if (max_iters < 1) {
    throw std::invalid_argument("estimate_lipschitz: max_iters must be >= 1");
  }

  NormalSampler normal(kPowerIterationSeed);
  Eigen::VectorXd v(op.dimension());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = normal.next();
  }
  v.normalize();

  LipschitzEstimate est;
  double rayleigh = 0.0;
  for (int iter = 1; iter <= max_iters; ++iter) {
    Eigen::VectorXd w = op.apply_adjoint(op.apply(v));
    const double next = v.dot(w);  // Rayleigh quotient of A^T A at unit v
    est.iterations = iter;
    const double change = std::abs(next - rayleigh);
    rayleigh = next;
    const double norm = w.norm();
    if (norm == 0.0) {  // A v = 0: the operator is zero on this start
      rayleigh = 0.0;
      est.converged = true;
      break;
    }
    if (iter > 1 && change <= tol * std::max(std::abs(rayleigh), 1e-300)) {
      est.converged = true;
      break;
    }
    v = w / norm;
  }

  est.value = 1.001 * rayleigh;
  op.lipschitz_ = est.value;
  return est;
}

void save_operator(const SensingOperator& op,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_operator: cannot open " + path.string());
  }
  out.write(kOperatorMagic, sizeof(kOperatorMagic));
  const std::uint64_t k = static_cast<std::uint64_t>(op.measurements());
  const std::uint64_t p = static_cast<std::uint64_t>(op.dimension());
  const std::uint64_t seed = op.seed();
  out.write(reinterpret_cast<const char*>(&k), sizeof(k));
  out.write(reinterpret_cast<const char*>(&p), sizeof(p));
  out.write(reinterpret_cast<const char*>(&seed), sizeof(seed));
  const auto& entries = op.entries();
  std::vector<double> row(static_cast<std::size_t>(entries.cols()));
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      row[static_cast<std::size_t>(j)] = entries(i, j);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) {
    throw std::runtime_error("save_operator: write failed for " +
                             path.string());
  }
}

SensingOperator load_operator(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_operator: cannot open " + path.string());
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kOperatorMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("load_operator: " + path.string() +
                             " is not an operator dump (bad magic)");
  }
  std::uint64_t k = 0, p = 0, seed = 0;
  in.read(reinterpret_cast<char*>(&k), sizeof(k));
  in.read(reinterpret_cast<char*>(&p), sizeof(p));
  in.read(reinterpret_cast<char*>(&seed), sizeof(seed));
  if (!in || k == 0 || p == 0) {
    throw std::runtime_error("load_operator: " + path.string() +
                             " has a truncated or invalid header");
  }
  Eigen::MatrixXd entries(static_cast<Eigen::Index>(k),
                          static_cast<Eigen::Index>(p));
  std::vector<double> row(static_cast<std::size_t>(p));
  for (std::uint64_t i = 0; i < k; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) {
      throw std::runtime_error("load_operator: " + path.string() +
                               " payload truncated at row " +
                               std::to_string(i));
    }
    for (std::uint64_t j = 0; j < p; ++j) {
      entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          row[static_cast<std::size_t>(j)];
    }
  }
  return SensingOperator(std::move(entries), seed);
}

}  // namespace lse
