#pragma once

#include <unordered_map>

#include "nce/estimators.hpp"

namespace nce {

/// One MCMC transition: candidates, the weights that selected among them,
/// the drawn index z, and the resulting state (next == candidates[z]).
struct KernelOutcome {
  Sample next;
  int z = 0;
  WeightSet weights;
  std::vector<Sample> candidates;
};

/// Conditional importance sampling kernel: draw x_{1..J} ~ q, weight the
/// J+1 candidates (conditioning sample included), pick z categorically.
/// Leaves the normalised model distribution invariant.
KernelOutcome cis_kernel_step(const UnnormalizedModel& model, const ParameterVector& theta,
                              const MarginalProposal& q, const Sample& x0, int num_noise,
                              Rng& rng);

/// Accept-reject kernel with the Barker-style probability
/// w~(x1|x0) / (w~(x1|x0) + w~(x0|x1)). Satisfies detailed balance.
KernelOutcome cnce_kernel_step(const UnnormalizedModel& model, const ParameterVector& theta,
                               const ConditionalProposal& q, const Sample& x0, Rng& rng);

/// Same proposal mechanism with the Metropolis-Hastings acceptance
/// min{1, w~(x1|x0)/w~(x0|x1)}; dominates the Barker probability pointwise.
KernelOutcome mh_kernel_step(const UnnormalizedModel& model, const ParameterVector& theta,
                             const ConditionalProposal& q, const Sample& x0, Rng& rng);

/// One-step contrastive-divergence gradient built on the CIS kernel with the
/// selection index marginalised out; agrees with rnce_gradient exactly when
/// fed the same samples.
GradientEstimate cd1_rnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                                   const MarginalProposal& q, const Sample& x0, int num_noise,
                                   Rng& rng);

/// k-step variant. Each step re-weights independently, contributes its
/// marginalised estimate, and then moves the chain through a sampled index;
/// the leading -grad log p~ term always uses the original data sample.
GradientEstimate cdk_rnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                                   const MarginalProposal& q, const Sample& x0, int num_noise,
                                   int steps, Rng& rng);

GradientEstimate cd1_cnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                                   const ConditionalProposal& q, const Sample& x0, int num_noise,
                                   Rng& rng, bool use_mh = false);

/// k-step conditional variant: J parallel chains started at x0, each stepped
/// k times; the estimate averages the marginalised two-point contribution
/// over chains and steps. Per step, all proposals are drawn first and the
/// accept draws happen after the contributions are computed.
GradientEstimate cdk_cnce_gradient(const UnnormalizedModel& model, const ParameterVector& theta,
                                   const ConditionalProposal& q, const Sample& x0, int num_noise,
                                   int steps, Rng& rng, bool use_mh = false);

/// Persistent MCMC state, one entry per training datum. A datum's chains are
/// created on first touch, initialised at the actual data sample.
class ChainStore {
 public:
  std::vector<Sample>& ensure(int data_index, const Sample& x0, int count);
  bool contains(int data_index) const { return chains_.contains(data_index); }
  const std::vector<Sample>& states(int data_index) const;
  void erase(int data_index) { chains_.erase(data_index); }
  void clear() { chains_.clear(); }

 private:
  std::unordered_map<int, std::vector<Sample>> chains_;
};

enum class PersistentVariant { Rnce, Cnce, MhCnce };

/// Persistent gradient: the kernel conditions on the stored chain state
/// while the leading -grad log p~ term keeps the true data sample; the
/// store is advanced with the sampled kernel outcome.
GradientEstimate persistent_gradient(PersistentVariant variant, const UnnormalizedModel& model,
                                     const ParameterVector& theta, const MarginalProposal* q,
                                     const ConditionalProposal* q_cond, ChainStore& store,
                                     int data_index, const Sample& x0_data, int num_noise,
                                     Rng& rng);

enum class KernelKind { Cis, Cnce, Mh };

/// Exact row-stochastic transition matrix of a kernel over a discrete toy
/// model, obtained by summing over every candidate/index outcome. The CIS
/// kernel needs a marginal table proposal, the accept-reject kernels a
/// conditional one.
Matrix exact_transition_matrix(KernelKind kind, const DiscreteToyModel& model,
                               const ParameterVector& theta,
                               const DiscreteTableProposal* marginal,
                               const DiscreteCondTableProposal* conditional, int num_noise);

}  // namespace nce
