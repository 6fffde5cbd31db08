#include "nce/proposal.hpp"

#include <cmath>
#include <stdexcept>

namespace nce {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kMinStd = 1e-3;
}  // namespace

std::vector<Sample> sample_batch(const MarginalProposal& q, int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample_batch: count must be >= 1");
  std::vector<Sample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(q.sample(rng));
  return out;
}

// ------------------------------------------------------- GaussianProposal

GaussianProposal::GaussianProposal(Vector mean, Vector scale)
    : dim_(static_cast<int>(mean.size())),
      phi_(ParamLayout{{"mean", dim_}, {"scale", dim_}}) {
  if (scale.size() != mean.size()) throw std::invalid_argument("GaussianProposal: length mismatch");
  phi_.segment("mean") = mean;
  phi_.segment("scale") = scale;
}

GaussianProposal GaussianProposal::standard(int dim) {
  return GaussianProposal(Vector::Zero(dim), Vector::Ones(dim));
}

Sample GaussianProposal::sample(Rng& rng) const {
  const auto mean = phi_.segment("mean");
  const auto scale = phi_.segment("scale");
  Sample x(dim_);
  for (int d = 0; d < dim_; ++d) x[d] = mean[d] + std::fabs(scale[d]) * rng.normal();
  return x;
}

double GaussianProposal::log_density(const Sample& x) const {
  if (x.size() != dim_) throw std::invalid_argument("GaussianProposal: dimension mismatch");
  const auto mean = phi_.segment("mean");
  const auto scale = phi_.segment("scale");
  double acc = -0.5 * dim_ * kLog2Pi;
  for (int d = 0; d < dim_; ++d) {
    const double s2 = scale[d] * scale[d];
    const double r = x[d] - mean[d];
    acc -= 0.5 * (r * r / s2 + std::log(s2));
  }
  return acc;
}

Vector GaussianProposal::grad_param_log_density(const Sample& x) const {
  if (x.size() != dim_) throw std::invalid_argument("GaussianProposal: dimension mismatch");
  const auto mean = phi_.segment("mean");
  const auto scale = phi_.segment("scale");
  Vector g(2 * dim_);
  for (int d = 0; d < dim_; ++d) {
    const double s = scale[d];
    const double r = x[d] - mean[d];
    g[d] = r / (s * s);
    g[dim_ + d] = r * r / (s * s * s) - 1.0 / s;
  }
  return g;
}

// --------------------------------------------------- GaussianCondProposal

GaussianCondProposal::GaussianCondProposal(int dim, double eps) : dim_(dim), eps_(eps) {
  if (dim <= 0) throw std::invalid_argument("GaussianCondProposal: dim must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("GaussianCondProposal: eps must be positive");
}

Sample GaussianCondProposal::sample_given(const Sample& x0, Rng& rng) const {
  if (x0.size() != dim_) throw std::invalid_argument("GaussianCondProposal: dimension mismatch");
  return x0 + eps_ * rng.normal_vector(dim_);
}

double GaussianCondProposal::log_density_given(const Sample& x1, const Sample& x0) const {
  if (x0.size() != dim_ || x1.size() != dim_) {
    throw std::invalid_argument("GaussianCondProposal: dimension mismatch");
  }
  const double sq = (x1 - x0).squaredNorm();
  return -0.5 * sq / (eps_ * eps_) - dim_ * std::log(eps_) - 0.5 * dim_ * kLog2Pi;
}

// ----------------------------------------------------- ArGaussianProposal

ArGaussianProposal::ArGaussianProposal(int dim)
    : dim_(dim), bias_(Vector::Zero(dim)), std_(Vector::Ones(dim)) {
  if (dim <= 0) throw std::invalid_argument("ArGaussianProposal: dim must be positive");
  weights_.reserve(dim);
  for (int d = 0; d < dim; ++d) weights_.push_back(Vector::Zero(d));
}

ArGaussianProposal ArGaussianProposal::from_data_moments(std::span<const Sample> data,
                                                         double inflate) {
  if (data.empty()) throw std::invalid_argument("from_data_moments: empty data");
  const int dim = static_cast<int>(data[0].size());
  ArGaussianProposal q(dim);
  const double n = static_cast<double>(data.size());
  for (int d = 0; d < dim; ++d) {
    double m = 0.0;
    for (const auto& x : data) m += x[d];
    m /= n;
    double v = 0.0;
    for (const auto& x : data) v += (x[d] - m) * (x[d] - m);
    v = data.size() > 1 ? v / (n - 1.0) : 1.0;
    q.set_bias(d, m);
    q.set_std(d, inflate * std::sqrt(v));
  }
  return q;
}

ArGaussianProposal ArGaussianProposal::from_model(const LinearGaussianArModel& model,
                                                  const ParameterVector& theta, bool theta_tied) {
  ArGaussianProposal q(model.dim());
  for (int d = 0; d < model.dim(); ++d) {
    Vector w(d);
    const int woff = model.weight_offset(d);
    for (int i = 0; i < d; ++i) w[i] = theta[woff + i];
    q.set_weights(d, w);
    q.set_bias(d, theta[model.bias_offset(d)]);
    q.set_std(d, model.cond_std(theta, d));
  }
  if (theta_tied) {
    q.tied_model_ = &model;
    q.tied_theta_ = theta;
  }
  return q;
}

void ArGaussianProposal::set_weights(int d, const Vector& w) {
  if (w.size() != d) throw std::invalid_argument("set_weights: length must equal coordinate");
  weights_[d] = w;
}

void ArGaussianProposal::set_bias(int d, double b) { bias_[d] = b; }

void ArGaussianProposal::set_std(int d, double s) { std_[d] = std::fmax(std::fabs(s), kMinStd); }

double ArGaussianProposal::cond_mean(int d, const Vector& prefix) const {
  if (prefix.size() != d) throw std::invalid_argument("cond_mean: prefix length mismatch");
  return bias_[d] + weights_[d].dot(prefix);
}

double ArGaussianProposal::cond_std(int d) const { return std_[d]; }

double ArGaussianProposal::sample_cond(int d, const Vector& prefix, Rng& rng) const {
  return cond_mean(d, prefix) + std_[d] * rng.normal();
}

double ArGaussianProposal::log_density_cond(int d, const Vector& prefix, double xd) const {
  const double r = xd - cond_mean(d, prefix);
  return -0.5 * r * r / (std_[d] * std_[d]) - std::log(std_[d]) - 0.5 * kLog2Pi;
}

Sample ArGaussianProposal::sample_joint(Rng& rng) const {
  Sample x(dim_);
  for (int d = 0; d < dim_; ++d) x[d] = sample_cond(d, x.head(d), rng);
  return x;
}

double ArGaussianProposal::log_density_joint(const Sample& x) const {
  if (x.size() != dim_) throw std::invalid_argument("log_density_joint: dimension mismatch");
  double acc = 0.0;
  for (int d = 0; d < dim_; ++d) acc += log_density_cond(d, x.head(d), x[d]);
  return acc;
}

void ArGaussianProposal::add_grad_theta_log_density_cond(int d, const Vector& prefix, double xd,
                                                         double scale, Vector& grad) const {
  if (tied_model_ == nullptr) return;
  // q(.|prefix) is the tied model's normalised conditional, so
  // d/dtheta log q = d/dtheta log p~(x_d|prefix) + 0.5 on the log-precision.
  tied_model_->add_grad_log_unnorm_cond(tied_theta_, d, prefix, xd, scale, grad);
  grad[tied_model_->logprec_offset(d)] += 0.5 * scale;
}

// ------------------------------------------------- discrete-table proposals

DiscreteTableProposal::DiscreteTableProposal(const DiscreteToyModel& model, Vector probs)
    : model_(&model), probs_(std::move(probs)) {
  if (probs_.size() != model.support_size()) {
    throw std::invalid_argument("DiscreteTableProposal: wrong table length");
  }
  const double s = probs_.sum();
  if (!(s > 0.0)) throw std::invalid_argument("DiscreteTableProposal: zero mass");
  probs_ /= s;
}

DiscreteTableProposal DiscreteTableProposal::uniform(const DiscreteToyModel& model) {
  return DiscreteTableProposal(
      model, Vector::Constant(model.support_size(), 1.0 / model.support_size()));
}

DiscreteTableProposal DiscreteTableProposal::from_model(const DiscreteToyModel& model,
                                                        const ParameterVector& theta) {
  return DiscreteTableProposal(model, model.probabilities(theta));
}

Sample DiscreteTableProposal::sample(Rng& rng) const {
  return model_->point(rng.categorical(probs_));
}

double DiscreteTableProposal::log_density(const Sample& x) const {
  return std::log(probs_[model_->find_index(x)]);
}

DiscreteCondTableProposal::DiscreteCondTableProposal(const DiscreteToyModel& model, Matrix rows)
    : model_(&model), rows_(std::move(rows)) {
  const int k = model.support_size();
  if (rows_.rows() != k || rows_.cols() != k) {
    throw std::invalid_argument("DiscreteCondTableProposal: table must be K x K");
  }
  for (int from = 0; from < k; ++from) {
    const double s = rows_.row(from).sum();
    if (!(s > 0.0)) throw std::invalid_argument("DiscreteCondTableProposal: zero row");
    rows_.row(from) /= s;
  }
}

DiscreteCondTableProposal DiscreteCondTableProposal::uniform(const DiscreteToyModel& model) {
  const int k = model.support_size();
  return DiscreteCondTableProposal(model, Matrix::Constant(k, k, 1.0 / k));
}

Sample DiscreteCondTableProposal::sample_given(const Sample& x0, Rng& rng) const {
  const int from = model_->find_index(x0);
  const Vector row = rows_.row(from).transpose();
  return model_->point(rng.categorical(row));
}

double DiscreteCondTableProposal::log_density_given(const Sample& x1, const Sample& x0) const {
  return std::log(prob(model_->find_index(x1), model_->find_index(x0)));
}

// -------------------------------------------------- DiscreteSoftmaxProposal

DiscreteSoftmaxProposal::DiscreteSoftmaxProposal(const DiscreteToyModel& model, Matrix features,
                                                 Vector phi0)
    : model_(&model),
      features_(std::move(features)),
      phi_(ParamLayout{{"coeff", static_cast<int>(phi0.size())}}, phi0) {
  if (features_.rows() != model.support_size() || features_.cols() != phi0.size()) {
    throw std::invalid_argument("DiscreteSoftmaxProposal: feature matrix shape mismatch");
  }
}

Vector DiscreteSoftmaxProposal::probabilities() const {
  return softmax(features_ * phi_.values());
}

Sample DiscreteSoftmaxProposal::sample(Rng& rng) const {
  return model_->point(rng.categorical(probabilities()));
}

double DiscreteSoftmaxProposal::log_density(const Sample& x) const {
  return std::log(probabilities()[model_->find_index(x)]);
}

Vector DiscreteSoftmaxProposal::grad_param_log_prob(int k) const {
  const Vector p = probabilities();
  Vector g = features_.row(k).transpose();
  g -= features_.transpose() * p;
  return g;
}

Vector DiscreteSoftmaxProposal::grad_param_log_density(const Sample& x) const {
  return grad_param_log_prob(model_->find_index(x));
}

}  // namespace nce
