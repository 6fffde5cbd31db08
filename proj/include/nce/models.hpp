#pragma once

#include <vector>

#include "nce/model.hpp"

namespace nce {

/// Diagonal Gaussian with unnormalised density exp(-0.5 (x-m)' S^-1 (x-m)),
/// S = diag(s^2). The scale vector s is stored unconstrained and squared on
/// use, so gradient steps need no projection.
class GaussianDiagModel : public UnnormalizedModel {
 public:
  explicit GaussianDiagModel(int dim);

  int dim() const override { return dim_; }
  int param_count() const override { return 2 * dim_; }
  ParamLayout param_layout() const override;

  double log_unnorm(const ParameterVector& theta, const Sample& x) const override;
  Vector grad_log_unnorm(const ParameterVector& theta, const Sample& x) const override;

  bool has_exact_partition() const override { return true; }
  double log_partition(const ParameterVector& theta) const override;

  bool has_exact_sampler() const override { return true; }
  Sample sample_exact(const ParameterVector& theta, Rng& rng) const override;

  ParameterVector make_params(const Vector& mean, const Vector& scale) const;

 private:
  int dim_;
};

/// Ring-shaped density on R^D: log p~ = -0.5 * exp(theta) * (|x| - mu)^2
/// with known radius mu and a single learnable log-precision theta.
/// No closed-form normaliser; no exact sampler (see sample_ring_data).
class RingModel : public UnnormalizedModel {
 public:
  explicit RingModel(double mu, int dim = 5);

  int dim() const override { return dim_; }
  int param_count() const override { return 1; }
  ParamLayout param_layout() const override { return ParamLayout{{"logprec", 1}}; }

  double log_unnorm(const ParameterVector& theta, const Sample& x) const override;
  Vector grad_log_unnorm(const ParameterVector& theta, const Sample& x) const override;

  double mu() const { return mu_; }

 private:
  double mu_;
  int dim_;
};

/// Draws from the normalised ring density: direction uniform on the sphere,
/// radius from the 1-D density r^(D-1) exp(-0.5 e^theta (r - mu)^2) via a
/// grid inverse CDF (2^14 points on [max(0, mu-8s), mu+8s], s = e^(-theta/2)).
std::vector<Sample> sample_ring_data(double theta, double mu, int dim, int n, Rng& rng);

/// Linear-Gaussian autoregressive model. Per coordinate d (0-based):
///   log p~(x_d | x_{0:d}) = -0.5 * exp(lp_d) * (x_d - w_d . prefix - b_d)^2
/// Parameters per coordinate: weights w_d (length d), bias b_d, log-precision
/// lp_d. Exact normaliser and ancestral sampler are available.
class LinearGaussianArModel : public AutoregressiveModel {
 public:
  explicit LinearGaussianArModel(int dim);

  int dim() const override { return dim_; }
  int param_count() const override;
  ParamLayout param_layout() const override;

  double log_unnorm(const ParameterVector& theta, const Sample& x) const override;
  Vector grad_log_unnorm(const ParameterVector& theta, const Sample& x) const override;

  double log_unnorm_cond(const ParameterVector& theta, int d, const Vector& prefix,
                         double xd) const override;
  void add_grad_log_unnorm_cond(const ParameterVector& theta, int d, const Vector& prefix,
                                double xd, double scale, Vector& grad) const override;

  bool has_exact_partition() const override { return true; }
  double log_partition(const ParameterVector& theta) const override;

  bool has_exact_sampler() const override { return true; }
  Sample sample_exact(const ParameterVector& theta, Rng& rng) const override;

  double cond_mean(const ParameterVector& theta, int d, const Vector& prefix) const;
  double cond_std(const ParameterVector& theta, int d) const;
  double log_precision(const ParameterVector& theta, int d) const;

  int weight_offset(int d) const;
  int bias_offset(int d) const;
  int logprec_offset(int d) const;

 private:
  int dim_;
};

/// Finite-support model used as the substrate for exact enumeration checks.
/// Mass of point k is exp(theta . f_k) with a fixed feature row f_k, so all
/// masses are positive and the theta-gradient of each log-mass is just f_k.
class DiscreteToyModel : public UnnormalizedModel {
 public:
  DiscreteToyModel(std::vector<Sample> support, Matrix features);

  int dim() const override { return sample_dim_; }
  int param_count() const override { return static_cast<int>(features_.cols()); }
  ParamLayout param_layout() const override {
    return ParamLayout{{"coeff", static_cast<int>(features_.cols())}};
  }

  double log_unnorm(const ParameterVector& theta, const Sample& x) const override;
  Vector grad_log_unnorm(const ParameterVector& theta, const Sample& x) const override;

  bool has_exact_partition() const override { return true; }
  double log_partition(const ParameterVector& theta) const override;

  bool has_exact_sampler() const override { return true; }
  Sample sample_exact(const ParameterVector& theta, Rng& rng) const override;

  int support_size() const { return static_cast<int>(support_.size()); }
  const Sample& point(int k) const { return support_[k]; }
  int find_index(const Sample& x) const;

  double log_mass(const ParameterVector& theta, int k) const;
  Vector grad_log_mass(int k) const { return features_.row(k).transpose(); }
  /// Normalised point probabilities under theta.
  Vector probabilities(const ParameterVector& theta) const;

 private:
  std::vector<Sample> support_;
  Matrix features_;  // K x P
  int sample_dim_;
};

}  // namespace nce
