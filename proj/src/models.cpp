#include "nce/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nce {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
}

// ---------------------------------------------------------------- Gaussian

GaussianDiagModel::GaussianDiagModel(int dim) : dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("GaussianDiagModel: dim must be positive");
}

ParamLayout GaussianDiagModel::param_layout() const {
  return ParamLayout{{"mean", dim_}, {"scale", dim_}};
}

double GaussianDiagModel::log_unnorm(const ParameterVector& theta, const Sample& x) const {
  check_input(theta, x);
  const auto mean = theta.segment("mean");
  const auto scale = theta.segment("scale");
  double acc = 0.0;
  for (int d = 0; d < dim_; ++d) {
    const double r = x[d] - mean[d];
    acc += r * r / (scale[d] * scale[d]);
  }
  return -0.5 * acc;
}

Vector GaussianDiagModel::grad_log_unnorm(const ParameterVector& theta, const Sample& x) const {
  check_input(theta, x);
  const auto mean = theta.segment("mean");
  const auto scale = theta.segment("scale");
  Vector g(param_count());
  for (int d = 0; d < dim_; ++d) {
    const double s2 = scale[d] * scale[d];
    const double r = x[d] - mean[d];
    g[d] = r / s2;
    g[dim_ + d] = r * r / (s2 * scale[d]);
  }
  return g;
}

double GaussianDiagModel::log_partition(const ParameterVector& theta) const {
  const auto scale = theta.segment("scale");
  double acc = 0.5 * dim_ * kLog2Pi;
  for (int d = 0; d < dim_; ++d) acc += 0.5 * std::log(scale[d] * scale[d]);
  return acc;
}

Sample GaussianDiagModel::sample_exact(const ParameterVector& theta, Rng& rng) const {
  const auto mean = theta.segment("mean");
  const auto scale = theta.segment("scale");
  Sample x(dim_);
  for (int d = 0; d < dim_; ++d) x[d] = mean[d] + std::fabs(scale[d]) * rng.normal();
  return x;
}

ParameterVector GaussianDiagModel::make_params(const Vector& mean, const Vector& scale) const {
  if (mean.size() != dim_ || scale.size() != dim_) {
    throw std::invalid_argument("GaussianDiagModel::make_params: wrong lengths");
  }
  ParameterVector theta(param_layout());
  theta.segment("mean") = mean;
  theta.segment("scale") = scale;
  return theta;
}

// -------------------------------------------------------------------- Ring

RingModel::RingModel(double mu, int dim) : mu_(mu), dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("RingModel: dim must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("RingModel: mu must be positive");
}

double RingModel::log_unnorm(const ParameterVector& theta, const Sample& x) const {
  check_input(theta, x);
  const double e = x.norm() - mu_;
  return -0.5 * std::exp(theta[0]) * e * e;
}

Vector RingModel::grad_log_unnorm(const ParameterVector& theta, const Sample& x) const {
  check_input(theta, x);
  const double e = x.norm() - mu_;
  Vector g(1);
  g[0] = -0.5 * std::exp(theta[0]) * e * e;
  return g;
}

std::vector<Sample> sample_ring_data(double theta, double mu, int dim, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_ring_data: n must be >= 1");
  const double sigma = std::exp(-0.5 * theta);
  const double lo = std::fmax(0.0, mu - 8.0 * sigma);
  const double hi = mu + 8.0 * sigma;
  constexpr int kGrid = 1 << 14;

  // Radial density r^(D-1) exp(-0.5 e^theta (r-mu)^2) tabulated on the grid;
  // sampled through the (trapezoid) inverse CDF for reproducibility.
  Vector r(kGrid), pdf(kGrid), cdf(kGrid);
  const double step = (hi - lo) / (kGrid - 1);
  const double prec = std::exp(theta);
  double log_shift = kNegInf;
  for (int i = 0; i < kGrid; ++i) {
    r[i] = lo + step * i;
    const double lg = (r[i] > 0.0)
                          ? (dim - 1) * std::log(r[i]) - 0.5 * prec * (r[i] - mu) * (r[i] - mu)
                          : kNegInf;
    pdf[i] = lg;
    log_shift = std::fmax(log_shift, lg);
  }
  for (int i = 0; i < kGrid; ++i) pdf[i] = std::exp(pdf[i] - log_shift);
  cdf[0] = 0.0;
  for (int i = 1; i < kGrid; ++i) cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * step;
  const double total = cdf[kGrid - 1];
  for (int i = 0; i < kGrid; ++i) cdf[i] /= total;

  std::vector<Sample> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform01();
    int lo_i = 0, hi_i = kGrid - 1;
    while (hi_i - lo_i > 1) {
      const int mid = (lo_i + hi_i) / 2;
      (cdf[mid] <= u ? lo_i : hi_i) = mid;
    }
    const double span = cdf[hi_i] - cdf[lo_i];
    const double frac = span > 0.0 ? (u - cdf[lo_i]) / span : 0.0;
    const double radius = r[lo_i] + frac * step;

    Vector dir = rng.normal_vector(dim);
    while (dir.norm() < 1e-12) dir = rng.normal_vector(dim);
    out.push_back(radius * dir / dir.norm());
  }
  return out;
}

// ------------------------------------------------------------- Linear AR

LinearGaussianArModel::LinearGaussianArModel(int dim) : dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("LinearGaussianArModel: dim must be positive");
}

int LinearGaussianArModel::param_count() const { return dim_ * (dim_ - 1) / 2 + 2 * dim_; }

ParamLayout LinearGaussianArModel::param_layout() const {
  ParamLayout layout;
  for (int d = 0; d < dim_; ++d) {
    if (d > 0) layout.append("w" + std::to_string(d), d);
    layout.append("b" + std::to_string(d), 1);
    layout.append("lp" + std::to_string(d), 1);
  }
  return layout;
}

// Per-coordinate blocks are laid out consecutively: [w_d | b_d | lp_d].
int LinearGaussianArModel::weight_offset(int d) const { return d * (d - 1) / 2 + 2 * d; }
int LinearGaussianArModel::bias_offset(int d) const { return weight_offset(d) + d; }
int LinearGaussianArModel::logprec_offset(int d) const { return bias_offset(d) + 1; }

double LinearGaussianArModel::cond_mean(const ParameterVector& theta, int d,
                                        const Vector& prefix) const {
  double m = theta[bias_offset(d)];
  const int woff = weight_offset(d);
  for (int i = 0; i < d; ++i) m += theta[woff + i] * prefix[i];
  return m;
}

double LinearGaussianArModel::log_precision(const ParameterVector& theta, int d) const {
  return theta[logprec_offset(d)];
}

double LinearGaussianArModel::cond_std(const ParameterVector& theta, int d) const {
  return std::exp(-0.5 * log_precision(theta, d));
}

double LinearGaussianArModel::log_unnorm_cond(const ParameterVector& theta, int d,
                                              const Vector& prefix, double xd) const {
  if (prefix.size() != d) throw std::invalid_argument("log_unnorm_cond: prefix length mismatch");
  const double r = xd - cond_mean(theta, d, prefix);
  return -0.5 * std::exp(log_precision(theta, d)) * r * r;
}

void LinearGaussianArModel::add_grad_log_unnorm_cond(const ParameterVector& theta, int d,
                                                     const Vector& prefix, double xd,
                                                     double scale, Vector& grad) const {
  if (prefix.size() != d) throw std::invalid_argument("grad cond: prefix length mismatch");
  if (grad.size() != param_count()) throw std::invalid_argument("grad cond: bad grad length");
  const double prec = std::exp(log_precision(theta, d));
  const double r = xd - cond_mean(theta, d, prefix);
  const int woff = weight_offset(d);
  for (int i = 0; i < d; ++i) grad[woff + i] += scale * prec * r * prefix[i];
  grad[bias_offset(d)] += scale * prec * r;
  grad[logprec_offset(d)] += scale * (-0.5) * prec * r * r;
}

double LinearGaussianArModel::log_unnorm(const ParameterVector& theta, const Sample& x) const {
  check_input(theta, x);
  double acc = 0.0;
  for (int d = 0; d < dim_; ++d) acc += log_unnorm_cond(theta, d, x.head(d), x[d]);
  return acc;
}

Vector LinearGaussianArModel::grad_log_unnorm(const ParameterVector& theta,
                                              const Sample& x) const {
  check_input(theta, x);
  Vector g = Vector::Zero(param_count());
  for (int d = 0; d < dim_; ++d) add_grad_log_unnorm_cond(theta, d, x.head(d), x[d], 1.0, g);
  return g;
}

double LinearGaussianArModel::log_partition(const ParameterVector& theta) const {
  double acc = 0.0;
  for (int d = 0; d < dim_; ++d) acc += 0.5 * kLog2Pi - 0.5 * log_precision(theta, d);
  return acc;
}

Sample LinearGaussianArModel::sample_exact(const ParameterVector& theta, Rng& rng) const {
  Sample x(dim_);
  for (int d = 0; d < dim_; ++d) {
    x[d] = cond_mean(theta, d, x.head(d)) + cond_std(theta, d) * rng.normal();
  }
  return x;
}

// ------------------------------------------------------------ Discrete toy

DiscreteToyModel::DiscreteToyModel(std::vector<Sample> support, Matrix features)
    : support_(std::move(support)), features_(std::move(features)) {
  if (support_.empty()) throw std::invalid_argument("DiscreteToyModel: empty support");
  if (features_.rows() != static_cast<Eigen::Index>(support_.size())) {
    throw std::invalid_argument("DiscreteToyModel: one feature row per support point required");
  }
  sample_dim_ = static_cast<int>(support_[0].size());
  for (const auto& p : support_) {
    if (p.size() != sample_dim_) throw std::invalid_argument("DiscreteToyModel: ragged support");
  }
  for (std::size_t a = 0; a < support_.size(); ++a) {
    for (std::size_t b = a + 1; b < support_.size(); ++b) {
      if ((support_[a] - support_[b]).norm() < 1e-9) {
        throw std::invalid_argument("DiscreteToyModel: support points must be distinct");
      }
    }
  }
}

int DiscreteToyModel::find_index(const Sample& x) const {
  for (int k = 0; k < support_size(); ++k) {
    if ((support_[k] - x).norm() < 1e-9) return k;
  }
  throw std::invalid_argument("DiscreteToyModel: sample is not a support point");
}

double DiscreteToyModel::log_mass(const ParameterVector& theta, int k) const {
  return features_.row(k).dot(theta.values());
}

double DiscreteToyModel::log_unnorm(const ParameterVector& theta, const Sample& x) const {
  check_input(theta, x);
  return log_mass(theta, find_index(x));
}

Vector DiscreteToyModel::grad_log_unnorm(const ParameterVector& theta, const Sample& x) const {
  check_input(theta, x);
  return grad_log_mass(find_index(x));
}

double DiscreteToyModel::log_partition(const ParameterVector& theta) const {
  Vector lm(support_size());
  for (int k = 0; k < support_size(); ++k) lm[k] = log_mass(theta, k);
  return log_sum_exp(lm);
}

Vector DiscreteToyModel::probabilities(const ParameterVector& theta) const {
  Vector lm(support_size());
  for (int k = 0; k < support_size(); ++k) lm[k] = log_mass(theta, k);
  return softmax(lm);
}

Sample DiscreteToyModel::sample_exact(const ParameterVector& theta, Rng& rng) const {
  return support_[rng.categorical(probabilities(theta))];
}

}  // namespace nce
