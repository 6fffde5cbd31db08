#include "nce/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace nce {

namespace {

std::vector<Sample> with_head(const Sample& x0, std::vector<Sample> tail) {
  std::vector<Sample> all;
  all.reserve(tail.size() + 1);
  all.push_back(x0);
  for (auto& s : tail) all.push_back(std::move(s));
  return all;
}

WeightSet bernoulli_weights(const PairWeights& pw, double accept) {
  WeightSet w;
  w.log_unnorm = Vector(2);
  w.log_unnorm << pw.log_w_rev, pw.log_w_fwd;
  w.norm = Vector(2);
  w.norm << 1.0 - accept, accept;
  w.log_sum = log_sum_exp(w.log_unnorm);
  return w;
}

}  // namespace

KernelOutcome cis_kernel_step(const UnnormalizedModel& model, const ParameterVector& theta,
                              const MarginalProposal& q, const Sample& x0, int num_noise,
                              Rng& rng) {
  if (num_noise < 1) throw std::invalid_argument("cis_kernel_step: num_noise must be >= 1");
  KernelOutcome out;
  out.candidates = with_head(x0, sample_batch(q, num_noise, rng));
  out.weights = importance_weights(model, theta, q, out.candidates);
  out.z = rng.categorical(out.weights.norm);
  out.next = out.candidates[out.z];
  return out;
}

KernelOutcome cnce_kernel_step(const UnnormalizedModel& model, const ParameterVector& theta,
                               const ConditionalProposal& q, const Sample& x0, Rng& rng) {
  KernelOutcome out;
  out.candidates = {x0, q.sample_given(x0, rng)};
  const PairWeights pw = cnce_pair_weights(model, theta, q, x0, out.candidates[1]);
  out.weights = bernoulli_weights(pw, pw.accept_cnce);
  out.z = rng.uniform01() < pw.accept_cnce ? 1 : 0;
  out.next = out.candidates[out.z];
  return out;
}

KernelOutcome mh_kernel_step(const UnnormalizedModel& model, const ParameterVector& theta,
                             const ConditionalProposal& q, const Sample& x0, Rng& rng) {
  KernelOutcome out;
  out.candidates = {x0, q.sample_given(x0, rng)};
  const PairWeights pw = cnce_pair_weights(model, theta, q, x0, out.candidates[1]);
  out.weights = bernoulli_weights(pw, pw.accept_mh);
  out.z = rng.uniform01() < pw.accept_mh ? 1 : 0;
  out.next = out.candidates[out.z];
  return out;
}

GradientEstimate cd1_rnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                                   const MarginalProposal& q, const Sample& x0, int num_noise,
                                   Rng& rng) {
  if (num_noise < 1) throw std::invalid_argument("cd1_rnce_gradient: num_noise must be >= 1");
  const std::vector<Sample> all = with_head(x0, sample_batch(q, num_noise, rng));
  const WeightSet w = importance_weights(model, theta, q, all);

  // CD expectation over the kernel outcome with z marginalised:
  // E[grad log p~(x_z)] = sum_z norm_z grad log p~(candidate_z).
  GradientEstimate est;
  est.grad = -model.grad_log_unnorm(theta, x0);
  for (std::size_t j = 0; j < all.size(); ++j) {
    est.grad += w.norm[static_cast<Eigen::Index>(j)] * model.grad_log_unnorm(theta, all[j]);
  }
  est.loss = -w.log_unnorm[0] + w.log_sum;
  if (!all_finite(est.grad)) throw NumericError("cd1_rnce_gradient: non-finite estimate");
  return est;
}

GradientEstimate cdk_rnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                                   const MarginalProposal& q, const Sample& x0, int num_noise,
                                   int steps, Rng& rng) {
  if (num_noise < 1) throw std::invalid_argument("cdk_rnce_gradient: num_noise must be >= 1");
  if (steps < 1) throw std::invalid_argument("cdk_rnce_gradient: steps must be >= 1");

  GradientEstimate est;
  est.grad = -model.grad_log_unnorm(theta, x0);
  Vector second = Vector::Zero(model.param_count());
  Sample cond = x0;
  for (int step = 0; step < steps; ++step) {
    const std::vector<Sample> all = with_head(cond, sample_batch(q, num_noise, rng));
    // Weights are renormalised from scratch at every step; no quantity is
    // carried over except the sampled chain state.
    const WeightSet w = importance_weights(model, theta, q, all);
    for (std::size_t j = 0; j < all.size(); ++j) {
      second += w.norm[static_cast<Eigen::Index>(j)] * model.grad_log_unnorm(theta, all[j]);
    }
    if (step == 0) est.loss = -w.log_unnorm[0] + w.log_sum;
    cond = all[rng.categorical(w.norm)];
  }
  est.grad += second / static_cast<double>(steps);
  if (!all_finite(est.grad)) throw NumericError("cdk_rnce_gradient: non-finite estimate");
  return est;
}

GradientEstimate cd1_cnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                                   const ConditionalProposal& q, const Sample& x0, int num_noise,
                                   Rng& rng, bool use_mh) {
  return cdk_cnce_gradient(model, theta, q, x0, num_noise, 1, rng, use_mh);
}

GradientEstimate cdk_cnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                                   const ConditionalProposal& q, const Sample& x0, int num_noise,
                                   int steps, Rng& rng, bool use_mh) {
  if (num_noise < 1) throw std::invalid_argument("cdk_cnce_gradient: num_noise must be >= 1");
  if (steps < 1) throw std::invalid_argument("cdk_cnce_gradient: steps must be >= 1");

  GradientEstimate est;
  est.grad = -model.grad_log_unnorm(theta, x0);
  Vector second = Vector::Zero(model.param_count());
  std::vector<Sample> states(num_noise, x0);
  std::vector<Sample> proposals(num_noise);
  Vector accept(num_noise);

  double loss_acc = 0.0, acc_cnce = 0.0, acc_mh = 0.0;
  for (int step = 0; step < steps; ++step) {
    for (int j = 0; j < num_noise; ++j) proposals[j] = q.sample_given(states[j], rng);
    for (int j = 0; j < num_noise; ++j) {
      const PairWeights pw = cnce_pair_weights(model, theta, q, states[j], proposals[j]);
      const double a = use_mh ? pw.accept_mh : pw.accept_cnce;
      accept[j] = a;
      second += (1.0 - a) * model.grad_log_unnorm(theta, states[j]) +
                a * model.grad_log_unnorm(theta, proposals[j]);
      if (step == 0) loss_acc += softplus(pw.log_ratio);
      acc_cnce += pw.accept_cnce;
      acc_mh += pw.accept_mh;
    }
    for (int j = 0; j < num_noise; ++j) {
      if (rng.uniform01() < accept[j]) states[j] = proposals[j];
    }
  }
  const double denom = static_cast<double>(num_noise) * steps;
  est.grad += second / denom;
  est.loss = loss_acc / num_noise;
  est.aux.mean_accept_cnce = acc_cnce / denom;
  est.aux.mean_accept_mh = acc_mh / denom;
  if (!all_finite(est.grad)) throw NumericError("cdk_cnce_gradient: non-finite estimate");
  return est;
}

std::vector<Sample>& ChainStore::ensure(int data_index, const Sample& x0, int count) {
  auto it = chains_.find(data_index);
  if (it == chains_.end()) {
    it = chains_.emplace(data_index, std::vector<Sample>(count, x0)).first;
  }
  if (static_cast<int>(it->second.size()) != count) {
    throw std::invalid_argument("ChainStore: chain count changed for a data index");
  }
  return it->second;
}

const std::vector<Sample>& ChainStore::states(int data_index) const {
  const auto it = chains_.find(data_index);
  if (it == chains_.end()) throw std::invalid_argument("ChainStore: unknown data index");
  return it->second;
}

GradientEstimate persistent_gradient(PersistentVariant variant, const UnnormalizedModel& model,
                                     const ParameterVector& theta, const MarginalProposal* q,
                                     const ConditionalProposal* q_cond, ChainStore& store,
                                     int data_index, const Sample& x0_data, int num_noise,
                                     Rng& rng) {
  if (num_noise < 1) throw std::invalid_argument("persistent_gradient: num_noise must be >= 1");

  GradientEstimate est;
  est.grad = -model.grad_log_unnorm(theta, x0_data);

  if (variant == PersistentVariant::Rnce) {
    if (q == nullptr) throw std::invalid_argument("persistent_gradient: marginal proposal needed");
    auto& states = store.ensure(data_index, x0_data, 1);
    const std::vector<Sample> all = with_head(states[0], sample_batch(q, num_noise, rng));
    const WeightSet w = importance_weights(model, theta, q, all);
    for (std::size_t j = 0; j < all.size(); ++j) {
      est.grad += w.norm[static_cast<Eigen::Index>(j)] * model.grad_log_unnorm(theta, all[j]);
    }
    // Surrogate NLL with the chain-conditioned partition estimate.
    est.loss = -model.log_unnorm(theta, x0_data) + log_zhat_cis(w);
    states[0] = all[rng.categorical(w.norm)];
  } else {
    if (q_cond == nullptr) {
      throw std::invalid_argument("persistent_gradient: conditional proposal needed");
    }
    const bool use_mh = variant == PersistentVariant::MhCnce;
    auto& states = store.ensure(data_index, x0_data, num_noise);
    std::vector<Sample> proposals(num_noise);
    Vector accept(num_noise);
    Vector second = Vector::Zero(model.param_count());
    double loss_acc = 0.0, acc_cnce = 0.0, acc_mh = 0.0;
    for (int j = 0; j < num_noise; ++j) proposals[j] = q_cond->sample_given(states[j], rng);
    for (int j = 0; j < num_noise; ++j) {
      const PairWeights pw = cnce_pair_weights(model, theta, *q_cond, states[j], proposals[j]);
      const double a = use_mh ? pw.accept_mh : pw.accept_cnce;
      accept[j] = a;
      second += (1.0 - a) * model.grad_log_unnorm(theta, states[j]) +
                a * model.grad_log_unnorm(theta, proposals[j]);
      loss_acc += softplus(pw.log_ratio);
      acc_cnce += pw.accept_cnce;
      acc_mh += pw.accept_mh;
    }
    for (int j = 0; j < num_noise; ++j) {
      if (rng.uniform01() < accept[j]) states[j] = proposals[j];
    }
    est.grad += second / static_cast<double>(num_noise);
    est.loss = loss_acc / num_noise;
    est.aux.mean_accept_cnce = acc_cnce / num_noise;
    est.aux.mean_accept_mh = acc_mh / num_noise;
  }
  if (!all_finite(est.grad)) throw NumericError("persistent_gradient: non-finite estimate");
  return est;
}

namespace {

Matrix transition_matrix_cis(const DiscreteToyModel& model, const ParameterVector& theta,
                             const DiscreteTableProposal& q, int num_noise) {
  const int k = model.support_size();
  Matrix m = Matrix::Zero(k, k);
  std::vector<int> tuple(num_noise, 0);
  for (int a = 0; a < k; ++a) {
    // Enumerate every proposal tuple and accumulate categorical selections.
    std::fill(tuple.begin(), tuple.end(), 0);
    while (true) {
      double prob = 1.0;
      for (const int t : tuple) prob *= q.prob(t);
      Vector log_w(num_noise + 1);
      log_w[0] = model.log_mass(theta, a) - std::log(q.prob(a));
      for (int j = 0; j < num_noise; ++j) {
        log_w[j + 1] = model.log_mass(theta, tuple[j]) - std::log(q.prob(tuple[j]));
      }
      const Vector norm = softmax(log_w);
      m(a, a) += prob * norm[0];
      for (int j = 0; j < num_noise; ++j) m(a, tuple[j]) += prob * norm[j + 1];

      int pos = num_noise - 1;
      while (pos >= 0 && ++tuple[pos] == k) tuple[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return m;
}

Matrix transition_matrix_pair(const DiscreteToyModel& model, const ParameterVector& theta,
                              const DiscreteCondTableProposal& q, bool use_mh) {
  const int k = model.support_size();
  Matrix m = Matrix::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const PairWeights pw = cnce_pair_weights(model, theta, q, model.point(a), model.point(b));
      const double accept = use_mh ? pw.accept_mh : pw.accept_cnce;
      const double prop = q.prob(b, a);
      m(a, b) += prop * accept;
      m(a, a) += prop * (1.0 - accept);
    }
  }
  return m;
}

}  // namespace

Matrix exact_transition_matrix(KernelKind kind, const DiscreteToyModel& model,
                               const ParameterVector& theta,
                               const DiscreteTableProposal* marginal,
                               const DiscreteCondTableProposal* conditional, int num_noise) {
  if (model.support_size() > 6) {
    throw std::invalid_argument("exact_transition_matrix: support capped at 6 points");
  }
  switch (kind) {
    case KernelKind::Cis:
      if (marginal == nullptr) {
        throw std::invalid_argument("exact_transition_matrix: marginal proposal needed");
      }
      if (num_noise < 1 || num_noise > 2) {
        throw std::invalid_argument("exact_transition_matrix: num_noise must be 1 or 2");
      }
      return transition_matrix_cis(model, theta, *marginal, num_noise);
    case KernelKind::Cnce:
    case KernelKind::Mh:
      if (conditional == nullptr) {
        throw std::invalid_argument("exact_transition_matrix: conditional proposal needed");
      }
      return transition_matrix_pair(model, theta, *conditional, kind == KernelKind::Mh);
  }
  throw std::invalid_argument("exact_transition_matrix: unknown kernel kind");
}

}  // namespace nce
