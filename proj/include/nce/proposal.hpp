#pragma once

#include <span>
#include <vector>

#include "nce/models.hpp"

namespace nce {

/// Marginal proposal q(x): i.i.d. sampling plus an exact normalised density.
class MarginalProposal {
 public:
  virtual ~MarginalProposal() = default;
  virtual int dim() const = 0;
  virtual Sample sample(Rng& rng) const = 0;
  virtual double log_density(const Sample& x) const = 0;
};

/// Conditional proposal q(x1 | x0), evaluable in both directions.
class ConditionalProposal {
 public:
  virtual ~ConditionalProposal() = default;
  virtual int dim() const = 0;
  virtual Sample sample_given(const Sample& x0, Rng& rng) const = 0;
  virtual double log_density_given(const Sample& x1, const Sample& x0) const = 0;
};

/// Marginal proposal with trainable parameters phi.
class AdaptiveMarginalProposal : public MarginalProposal {
 public:
  virtual ParameterVector& params() = 0;
  virtual const ParameterVector& params() const = 0;
  /// Analytic d/dphi log q_phi(x).
  virtual Vector grad_param_log_density(const Sample& x) const = 0;
};

std::vector<Sample> sample_batch(const MarginalProposal& q, int count, Rng& rng);

struct WeightSet;  // estimators.hpp

/// One SGD step on the cross-entropy surrogate: phi <- phi - lr * g with
/// g = -sum_j norm_j * d/dphi log q_phi(x_j). The weights must be the
/// normalised candidate weights of the same samples.
void adapt_step(AdaptiveMarginalProposal& q, const WeightSet& weights,
                std::span<const Sample> samples, double lr);

/// Diagonal Gaussian q_phi with phi = (mean, scale), scale squared on use;
/// the same parameterisation as GaussianDiagModel but normalised.
class GaussianProposal : public AdaptiveMarginalProposal {
 public:
  GaussianProposal(Vector mean, Vector scale);
  static GaussianProposal standard(int dim);

  int dim() const override { return dim_; }
  Sample sample(Rng& rng) const override;
  double log_density(const Sample& x) const override;

  ParameterVector& params() override { return phi_; }
  const ParameterVector& params() const override { return phi_; }
  Vector grad_param_log_density(const Sample& x) const override;

 private:
  int dim_;
  ParameterVector phi_;
};

/// Symmetric random-walk proposal N(x1; x0, eps^2 I).
class GaussianCondProposal : public ConditionalProposal {
 public:
  GaussianCondProposal(int dim, double eps);

  int dim() const override { return dim_; }
  Sample sample_given(const Sample& x0, Rng& rng) const override;
  double log_density_given(const Sample& x1, const Sample& x0) const override;

  double eps() const { return eps_; }

 private:
  int dim_;
  double eps_;
};

/// Proposal factorised over coordinates, q(x) = prod_d q(x_d | x_{0:d});
/// the sampling/weighting interface the sequential estimators run on.
class ArProposal {
 public:
  virtual ~ArProposal() = default;
  virtual int dim() const = 0;
  virtual double sample_cond(int d, const Vector& prefix, Rng& rng) const = 0;
  virtual double log_density_cond(int d, const Vector& prefix, double xd) const = 0;

  /// True when the proposal is an alias of the model at the current theta,
  /// in which case d/dtheta log q is non-zero and reported below.
  virtual bool theta_tied() const { return false; }
  virtual void add_grad_theta_log_density_cond(int /*d*/, const Vector& /*prefix*/,
                                               double /*xd*/, double /*scale*/,
                                               Vector& /*grad*/) const {}
};

/// Autoregressive Gaussian proposal: per coordinate d a linear-Gaussian
/// conditional N(x_d; c_d . prefix + e_d, tau_d^2). Stds are floored at 1e-3
/// to keep importance ratios bounded. Also usable as a joint (ancestral)
/// marginal proposal over full vectors.
class ArGaussianProposal : public ArProposal {
 public:
  explicit ArGaussianProposal(int dim);

  /// Independent per-coordinate Gaussians with data mean/std (std inflated
  /// by `inflate`); no cross-coordinate weights.
  static ArGaussianProposal from_data_moments(std::span<const Sample> data, double inflate = 1.0);

  /// The model's own conditionals at theta. With `theta_tied` the proposal
  /// remembers (model, theta) and can report d/dtheta log q, which the SMC
  /// gradient subtracts; otherwise it is treated as a fixed snapshot.
  static ArGaussianProposal from_model(const LinearGaussianArModel& model,
                                       const ParameterVector& theta, bool theta_tied = false);

  int dim() const override { return dim_; }

  double cond_mean(int d, const Vector& prefix) const;
  double cond_std(int d) const;
  double sample_cond(int d, const Vector& prefix, Rng& rng) const override;
  double log_density_cond(int d, const Vector& prefix, double xd) const override;

  Sample sample_joint(Rng& rng) const;
  double log_density_joint(const Sample& x) const;

  bool theta_tied() const override { return tied_model_ != nullptr; }
  /// Accumulates scale * d/dtheta log q(x_d | prefix); no-op unless tied.
  void add_grad_theta_log_density_cond(int d, const Vector& prefix, double xd, double scale,
                                       Vector& grad) const override;

  void set_weights(int d, const Vector& w);
  void set_bias(int d, double b);
  void set_std(int d, double s);

 private:
  int dim_;
  std::vector<Vector> weights_;  // weights_[d] has length d
  Vector bias_;
  Vector std_;
  const LinearGaussianArModel* tied_model_ = nullptr;
  ParameterVector tied_theta_;
};

/// MarginalProposal adapter over the joint density of an ArGaussianProposal.
class ArJointProposal : public MarginalProposal {
 public:
  explicit ArJointProposal(const ArGaussianProposal& ar) : ar_(&ar) {}
  int dim() const override { return ar_->dim(); }
  Sample sample(Rng& rng) const override { return ar_->sample_joint(rng); }
  double log_density(const Sample& x) const override { return ar_->log_density_joint(x); }

 private:
  const ArGaussianProposal* ar_;
};

// ---------------------------------------------------------------------------
// Finite-support proposals over a DiscreteToyModel's points; used by the
// enumeration oracles and kernel-validity checks.

class DiscreteTableProposal : public MarginalProposal {
 public:
  DiscreteTableProposal(const DiscreteToyModel& model, Vector probs);
  static DiscreteTableProposal uniform(const DiscreteToyModel& model);
  static DiscreteTableProposal from_model(const DiscreteToyModel& model,
                                          const ParameterVector& theta);

  int dim() const override { return model_->dim(); }
  Sample sample(Rng& rng) const override;
  double log_density(const Sample& x) const override;

  double prob(int k) const { return probs_[k]; }
  int support_size() const { return model_->support_size(); }

 private:
  const DiscreteToyModel* model_;
  Vector probs_;
};

class DiscreteCondTableProposal : public ConditionalProposal {
 public:
  /// rows(to, from): row-stochastic in `to` for each conditioning `from`.
  DiscreteCondTableProposal(const DiscreteToyModel& model, Matrix rows);
  static DiscreteCondTableProposal uniform(const DiscreteToyModel& model);

  int dim() const override { return model_->dim(); }
  Sample sample_given(const Sample& x0, Rng& rng) const override;
  double log_density_given(const Sample& x1, const Sample& x0) const override;

  double prob(int to, int from) const { return rows_(from, to); }

 private:
  const DiscreteToyModel* model_;
  Matrix rows_;  // K x K, row `from` sums to 1
};

/// Trainable finite-support proposal with softmax(G phi) probabilities;
/// the discrete counterpart of GaussianProposal for adaptation checks.
class DiscreteSoftmaxProposal : public AdaptiveMarginalProposal {
 public:
  DiscreteSoftmaxProposal(const DiscreteToyModel& model, Matrix features, Vector phi0);

  int dim() const override { return model_->dim(); }
  Sample sample(Rng& rng) const override;
  double log_density(const Sample& x) const override;

  ParameterVector& params() override { return phi_; }
  const ParameterVector& params() const override { return phi_; }
  Vector grad_param_log_density(const Sample& x) const override;

  Vector probabilities() const;
  double prob(int k) const { return probabilities()[k]; }
  Vector grad_param_log_prob(int k) const;

 private:
  const DiscreteToyModel* model_;
  Matrix features_;
  ParameterVector phi_;
};

}  // namespace nce
