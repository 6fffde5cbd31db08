#pragma once

#include <functional>

#include "nce/proposal.hpp"

namespace nce {

/// Law of the conditioning slot (index 0 of the candidate tuple) when
/// enumerating all outcomes of a contrastive draw over a discrete model.
/// JointIndex additionally enumerates which slot carries the model draw
/// (uniform over slots, the remaining slots i.i.d. from the proposal).
enum class ConditioningLaw { X0FromModel, X0FromTable, X0Fixed, JointIndex };

/// A fully enumerable instance: discrete model, proposal tables, tuple size.
/// Statistics receive the model-draw slot z and the candidate indices
/// [i_0, i_1, ..., i_J]; for laws other than JointIndex, z is always 0.
struct EnumerationInstance {
  const DiscreteToyModel* model = nullptr;
  ParameterVector theta;
  Vector marginal_probs;    // K entries; used when conditional_probs is empty
  Matrix conditional_probs; // K x K (row = conditioning index); optional
  int num_noise = 1;        // J
  ConditioningLaw law = ConditioningLaw::X0FromModel;
  Vector x0_probs;          // for X0FromTable
  int x0_index = 0;         // for X0Fixed

  std::size_t outcome_count() const;
};

using ScalarStatistic = std::function<double(int z, std::span<const int> idx)>;
using VectorStatistic = std::function<Vector(int z, std::span<const int> idx)>;

/// Exact expectation of the statistic over every outcome of the instance,
/// iterated lexicographically with compensated summation. Throws when the
/// outcome count exceeds 10^6.
double enumerate_expectation(const EnumerationInstance& inst, const ScalarStatistic& stat);
Vector enumerate_expectation(const EnumerationInstance& inst, int out_dim,
                             const VectorStatistic& stat);

/// Central finite differences of f around x, per coordinate.
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double step = 1e-5);

/// KL(p || q) between diagonal Gaussians given as (mean, std) pairs.
/// Scales must be strictly positive.
double gaussian_diag_kl(const Vector& mean_p, const Vector& scale_p, const Vector& mean_q,
                        const Vector& scale_q);

}  // namespace nce
