#pragma once

#include "nce/params.hpp"
#include "nce/rng.hpp"

namespace nce {

/// A point in a model's sample space (length D, all entries finite).
using Sample = Vector;

/// An unnormalised density: p(x) = exp(log_unnorm(theta, x)) / Z(theta).
/// Implementations are immutable descriptions; parameters travel separately
/// so the same object can be evaluated at many theta (and from many threads).
class UnnormalizedModel {
 public:
  virtual ~UnnormalizedModel() = default;

  virtual int dim() const = 0;
  virtual int param_count() const = 0;
  virtual ParamLayout param_layout() const = 0;

  virtual double log_unnorm(const ParameterVector& theta, const Sample& x) const = 0;

  /// Analytic gradient of log_unnorm in theta; length param_count().
  virtual Vector grad_log_unnorm(const ParameterVector& theta, const Sample& x) const = 0;

  virtual bool has_exact_partition() const { return false; }
  /// Exact log Z(theta); throws std::logic_error when unsupported.
  virtual double log_partition(const ParameterVector& theta) const;

  virtual bool has_exact_sampler() const { return false; }
  /// One i.i.d. draw from the normalised density; throws when unsupported.
  virtual Sample sample_exact(const ParameterVector& theta, Rng& rng) const;

 protected:
  void check_input(const ParameterVector& theta, const Sample& x) const;
};

/// Density that factorises over coordinates:
///   log_unnorm(x) = sum_d log_unnorm_cond(d, x[0..d), x[d]).
/// Coordinates are 0-based; prefix has length d.
class AutoregressiveModel : public UnnormalizedModel {
 public:
  virtual double log_unnorm_cond(const ParameterVector& theta, int d, const Vector& prefix,
                                 double xd) const = 0;

  /// Accumulates scale * d/dtheta log_unnorm_cond into grad.
  virtual void add_grad_log_unnorm_cond(const ParameterVector& theta, int d, const Vector& prefix,
                                        double xd, double scale, Vector& grad) const = 0;
};

}  // namespace nce
