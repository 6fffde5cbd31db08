#pragma once

#include <functional>

#include "nce/estimators.hpp"

namespace nce {

enum class ResamplePolicy { Adaptive, Always, Never };

/// State of a sequential sweep over an autoregressive model: J+1 partial
/// paths grown one coordinate per step, the running log partition estimate,
/// and the last step's (possibly skip-adjusted) weights. When a conditioning
/// path is set, particle 0 tracks it deterministically and never resamples.
struct ParticleSystem {
  Matrix paths;               // (J+1) x D, columns 0..steps_done-1 are valid
  Vector step_log_w;          // per-particle log weight of the last step
  Vector norm_w;              // normalised weights of the last step
  double log_zhat = 0.0;      // sum_d log[(1/(J+1)) sum_j w_jd]
  std::vector<char> resampled;
  std::vector<double> ess_trace;
  int steps_done = 0;
  Vector cond_path;           // empty when the sweep is unconditional

  int particle_count() const { return static_cast<int>(paths.rows()); }
  bool conditional() const { return cond_path.size() > 0; }
};

/// 1 / sum_j w_j^2 for normalised weights; ranges over [1, J+1].
double effective_sample_size(const Vector& norm_w);

/// True iff the effective sample size dropped strictly below (J+1)/2.
bool adaptive_resample_decision(const Vector& norm_w, int num_noise);

ParticleSystem make_particle_system(int num_noise, int dim);
ParticleSystem make_conditional_particle_system(int num_noise, const Sample& x0);

/// Advance the system by one coordinate: optionally resample ancestors from
/// the previous step's weights, draw the new coordinate for every free
/// particle, and weight. When resampling was skipped, weights carry the
/// (J+1) * norm_prev correction so the running partition estimate stays
/// consistent; the pinned path gets the same treatment as free particles.
void smc_step(ParticleSystem& sys, const AutoregressiveModel& model,
              const ParameterVector& theta, const ArProposal& q, Rng& rng,
              ResamplePolicy policy);

/// Called after each completed step; `d` is the 0-based coordinate.
using StepVisitor = std::function<void(int d, const ParticleSystem& sys)>;

ParticleSystem smc_sweep(const AutoregressiveModel& model, const ParameterVector& theta,
                         const ArProposal& q, int num_noise, Rng& rng,
                         ResamplePolicy policy = ResamplePolicy::Adaptive,
                         const StepVisitor* visitor = nullptr);

ParticleSystem csmc_sweep(const AutoregressiveModel& model, const ParameterVector& theta,
                          const ArProposal& q, const Sample& x0, int num_noise, Rng& rng,
                          ResamplePolicy policy = ResamplePolicy::Adaptive,
                          const StepVisitor* visitor = nullptr);

/// log of the sweep's partition estimate; requires a completed sweep.
double log_zhat_smc(const ParticleSystem& sys, int dim);

/// Ranking-criterion gradient with the conditional sequential sweep supplying
/// the partition term: -grad log p~(x0) + sum_d sum_j w_jd grad log
/// p~(x_d^j | prefix). Resampling indices are treated as fixed; when the
/// proposal is theta-tied its density gradient is subtracted per step.
GradientEstimate smc_rnce_gradient(const AutoregressiveModel& model, const ParameterVector& theta,
                                   const ArProposal& q, const Sample& x0, int num_noise, Rng& rng,
                                   ResamplePolicy policy = ResamplePolicy::Adaptive,
                                   ParticleSystem* out_system = nullptr);

}  // namespace nce
