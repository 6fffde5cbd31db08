#pragma once

#include <span>

#include "nce/proposal.hpp"

namespace nce {

/// Raised when an estimate cannot be formed (all weights vanished, a
/// non-finite value appeared, ...). The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Importance weights for one candidate set, kept in log space throughout.
/// norm = softmax(log_unnorm) sums to 1; log_sum = logsumexp(log_unnorm).
struct WeightSet {
  Vector log_unnorm;
  Vector norm;
  double log_sum = kNegInf;

  int size() const { return static_cast<int>(log_unnorm.size()); }
};

WeightSet normalize_log_weights(Vector log_w);

struct AuxDiagnostics {
  double mean_accept_cnce = kNaN;
  double mean_accept_mh = kNaN;
  double mean_ess = kNaN;
  double min_ess = kNaN;
};

/// Loss value plus gradient in theta-space for one criterion evaluation.
struct GradientEstimate {
  double loss = 0.0;
  Vector grad;
  AuxDiagnostics aux;
};

/// log w~_j = log p~(x_j) - log q(x_j) for each sample, normalised over the
/// given set. Throws NumericError if any q(x_j) is zero.
WeightSet importance_weights(const UnnormalizedModel& model, const ParameterVector& theta,
                             const MarginalProposal& q, std::span<const Sample> xs);

/// log[(1/J) sum w~_j] over proposal-only weights.
double log_zhat_is(const WeightSet& tail);
inline double zhat_is(const WeightSet& tail) { return std::exp(log_zhat_is(tail)); }

/// log[(1/(J+1)) sum w~_j] over weights that include the conditioning sample.
double log_zhat_cis(const WeightSet& all);
inline double zhat_cis(const WeightSet& all) { return std::exp(log_zhat_cis(all)); }

/// d/dtheta of log zhat_cis with samples held fixed: sum_j norm_j * grad
/// log p~(x_j). Assembled here independently of rnce_gradient so the two
/// routes cross-check each other.
Vector grad_log_zhat_cis(const UnnormalizedModel& model, const ParameterVector& theta,
                         std::span<const Sample> all, const WeightSet& weights);

/// Maximum-likelihood gradient with the self-normalised importance estimate
/// of grad log Z: weights are normalised over the proposal samples only,
/// never over x0. loss = -log p~(x0) + log zhat_is.
GradientEstimate mlis_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                               const MarginalProposal& q, const Sample& x0,
                               std::span<const Sample> tail);

/// Ranking criterion for one data point; all = [x0, x1..xJ].
/// loss = -log w~_0 + log sum_j w~_j.
double rnce_loss(const UnnormalizedModel& model, const ParameterVector& theta,
                 const MarginalProposal& q, std::span<const Sample> all);

/// Gradient of the ranking criterion: -grad log p~(x0) + sum_j norm_j *
/// grad log p~(x_j), with the normalisation running over all J+1 samples.
GradientEstimate rnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                               const MarginalProposal& q, std::span<const Sample> all);

/// Directed pair weights for the conditional criterion.
/// accept_cnce = sigmoid(log_ratio) is the Barker-style probability;
/// accept_mh = min(1, ratio) the Metropolis-Hastings one.
struct PairWeights {
  double log_w_fwd;  // log w~(xj | x0)
  double log_w_rev;  // log w~(x0 | xj)
  double log_ratio;  // log_w_fwd - log_w_rev
  double accept_cnce;
  double accept_mh;
};

PairWeights cnce_pair_weights(const UnnormalizedModel& model, const ParameterVector& theta,
                              const ConditionalProposal& q, const Sample& x0, const Sample& xj);

/// (1/J) sum_j log(1 + ratio_j), evaluated as softplus of the log-ratio.
double cnce_loss(const UnnormalizedModel& model, const ParameterVector& theta,
                 const ConditionalProposal& q, const Sample& x0, std::span<const Sample> tail);

GradientEstimate cnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                               const ConditionalProposal& q, const Sample& x0,
                               std::span<const Sample> tail);

/// Same two-point structure as cnce_gradient with the acceptance probability
/// swapped for the Metropolis-Hastings one. The reported loss is the
/// conditional-criterion value (diagnostic only; this variant has no scalar
/// criterion of its own).
GradientEstimate mh_cnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                                  const ConditionalProposal& q, const Sample& x0,
                                  std::span<const Sample> tail);

}  // namespace nce
