#include "nce/estimators.hpp"

#include <cmath>

namespace nce {

WeightSet normalize_log_weights(Vector log_w) {
  WeightSet w;
  w.log_sum = log_sum_exp(log_w);
  if (!std::isfinite(w.log_sum)) {
    throw NumericError("weight normalisation failed: log-sum is not finite");
  }
  w.norm = Vector(log_w.size());
  for (int i = 0; i < log_w.size(); ++i) w.norm[i] = std::exp(log_w[i] - w.log_sum);
  w.log_unnorm = std::move(log_w);
  return w;
}

WeightSet importance_weights(const UnnormalizedModel& model, const ParameterVector& theta,
                             const MarginalProposal& q, std::span<const Sample> xs) {
  Vector log_w(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double lq = q.log_density(xs[j]);
    if (lq == kNegInf) throw NumericError("importance_weights: proposal density is zero");
    log_w[static_cast<Eigen::Index>(j)] = model.log_unnorm(theta, xs[j]) - lq;
  }
  return normalize_log_weights(std::move(log_w));
}

double log_zhat_is(const WeightSet& tail) {
  if (tail.size() < 1) throw std::invalid_argument("log_zhat_is: needs at least one weight");
  return tail.log_sum - std::log(static_cast<double>(tail.size()));
}

double log_zhat_cis(const WeightSet& all) {
  if (all.size() < 2) throw std::invalid_argument("log_zhat_cis: needs conditioning + proposals");
  return all.log_sum - std::log(static_cast<double>(all.size()));
}

Vector grad_log_zhat_cis(const UnnormalizedModel& model, const ParameterVector& theta,
                         std::span<const Sample> all, const WeightSet& weights) {
  if (static_cast<int>(all.size()) != weights.size()) {
    throw std::invalid_argument("grad_log_zhat_cis: weight/sample length mismatch");
  }
  Vector g = Vector::Zero(model.param_count());
  for (std::size_t j = 0; j < all.size(); ++j) {
    g += weights.norm[static_cast<Eigen::Index>(j)] * model.grad_log_unnorm(theta, all[j]);
  }
  return g;
}

GradientEstimate mlis_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                               const MarginalProposal& q, const Sample& x0,
                               std::span<const Sample> tail) {
  if (tail.empty()) throw std::invalid_argument("mlis_gradient: needs at least one sample");
  const WeightSet w = importance_weights(model, theta, q, tail);
  GradientEstimate est;
  est.loss = -model.log_unnorm(theta, x0) + log_zhat_is(w);
  est.grad = -model.grad_log_unnorm(theta, x0);
  for (std::size_t j = 0; j < tail.size(); ++j) {
    est.grad += w.norm[static_cast<Eigen::Index>(j)] * model.grad_log_unnorm(theta, tail[j]);
  }
  if (!std::isfinite(est.loss) || !all_finite(est.grad)) {
    throw NumericError("mlis_gradient: non-finite estimate");
  }
  return est;
}

double rnce_loss(const UnnormalizedModel& model, const ParameterVector& theta,
                 const MarginalProposal& q, std::span<const Sample> all) {
  if (all.size() < 2) throw std::invalid_argument("rnce_loss: needs conditioning + proposals");
  const WeightSet w = importance_weights(model, theta, q, all);
  const double loss = -w.log_unnorm[0] + w.log_sum;
  if (!std::isfinite(loss)) throw NumericError("rnce_loss: non-finite value");
  return loss;
}

GradientEstimate rnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                               const MarginalProposal& q, std::span<const Sample> all) {
  if (all.size() < 2) throw std::invalid_argument("rnce_gradient: needs conditioning + proposals");
  const WeightSet w = importance_weights(model, theta, q, all);
  GradientEstimate est;
  est.loss = -w.log_unnorm[0] + w.log_sum;
  est.grad = -model.grad_log_unnorm(theta, all[0]);
  for (std::size_t j = 0; j < all.size(); ++j) {
    est.grad += w.norm[static_cast<Eigen::Index>(j)] * model.grad_log_unnorm(theta, all[j]);
  }
  if (!std::isfinite(est.loss) || !all_finite(est.grad)) {
    throw NumericError("rnce_gradient: non-finite estimate");
  }
  return est;
}

PairWeights cnce_pair_weights(const UnnormalizedModel& model, const ParameterVector& theta,
                              const ConditionalProposal& q, const Sample& x0, const Sample& xj) {
  PairWeights pw;
  const double lq_fwd = q.log_density_given(xj, x0);
  const double lq_rev = q.log_density_given(x0, xj);
  if (lq_fwd == kNegInf || lq_rev == kNegInf) {
    throw NumericError("cnce_pair_weights: proposal density is zero");
  }
  pw.log_w_fwd = model.log_unnorm(theta, xj) - lq_fwd;
  pw.log_w_rev = model.log_unnorm(theta, x0) - lq_rev;
  pw.log_ratio = pw.log_w_fwd - pw.log_w_rev;
  if (std::isnan(pw.log_ratio)) throw NumericError("cnce_pair_weights: both weights vanished");
  pw.accept_cnce = sigmoid(pw.log_ratio);
  pw.accept_mh = std::exp(std::fmin(0.0, pw.log_ratio));
  return pw;
}

double cnce_loss(const UnnormalizedModel& model, const ParameterVector& theta,
                 const ConditionalProposal& q, const Sample& x0, std::span<const Sample> tail) {
  if (tail.empty()) throw std::invalid_argument("cnce_loss: needs at least one sample");
  double acc = 0.0;
  for (const auto& xj : tail) acc += softplus(cnce_pair_weights(model, theta, q, x0, xj).log_ratio);
  const double loss = acc / static_cast<double>(tail.size());
  if (!std::isfinite(loss)) throw NumericError("cnce_loss: non-finite value");
  return loss;
}

namespace {

GradientEstimate conditional_pair_gradient(const UnnormalizedModel& model,
                                           const ParameterVector& theta,
                                           const ConditionalProposal& q, const Sample& x0,
                                           std::span<const Sample> tail, bool use_mh) {
  if (tail.empty()) throw std::invalid_argument("conditional gradient: needs >= 1 sample");
  const double inv_j = 1.0 / static_cast<double>(tail.size());
  const Vector g0 = model.grad_log_unnorm(theta, x0);

  GradientEstimate est;
  est.grad = -g0;
  double loss_acc = 0.0;
  double acc_cnce = 0.0;
  double acc_mh = 0.0;
  for (const auto& xj : tail) {
    const PairWeights pw = cnce_pair_weights(model, theta, q, x0, xj);
    const double a = use_mh ? pw.accept_mh : pw.accept_cnce;
    est.grad += inv_j * ((1.0 - a) * g0 + a * model.grad_log_unnorm(theta, xj));
    loss_acc += softplus(pw.log_ratio);
    acc_cnce += pw.accept_cnce;
    acc_mh += pw.accept_mh;
  }
  est.loss = loss_acc * inv_j;
  est.aux.mean_accept_cnce = acc_cnce * inv_j;
  est.aux.mean_accept_mh = acc_mh * inv_j;
  if (!std::isfinite(est.loss) || !all_finite(est.grad)) {
    throw NumericError("conditional gradient: non-finite estimate");
  }
  return est;
}

}  // namespace

GradientEstimate cnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                               const ConditionalProposal& q, const Sample& x0,
                               std::span<const Sample> tail) {
  return conditional_pair_gradient(model, theta, q, x0, tail, /*use_mh=*/false);
}

GradientEstimate mh_cnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                                  const ConditionalProposal& q, const Sample& x0,
                                  std::span<const Sample> tail) {
  return conditional_pair_gradient(model, theta, q, x0, tail, /*use_mh=*/true);
}

void adapt_step(AdaptiveMarginalProposal& q, const WeightSet& weights,
                std::span<const Sample> samples, double lr) {
  if (static_cast<int>(samples.size()) != weights.size()) {
    throw std::invalid_argument("adapt_step: weight/sample length mismatch");
  }
  Vector g = Vector::Zero(q.params().size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    g -= weights.norm[static_cast<Eigen::Index>(j)] * q.grad_param_log_density(samples[j]);
  }
  q.params().values() -= lr * g;
  q.params().validate();
}

}  // namespace nce
