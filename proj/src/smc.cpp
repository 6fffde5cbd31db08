#include "nce/smc.hpp"

#include <cmath>
#include <stdexcept>

namespace nce {

double effective_sample_size(const Vector& norm_w) {
  if (norm_w.size() == 0) throw std::invalid_argument("effective_sample_size: empty weights");
  const double s = norm_w.squaredNorm();
  if (!(s > 0.0)) throw std::invalid_argument("effective_sample_size: all weights zero");
  return 1.0 / s;
}

bool adaptive_resample_decision(const Vector& norm_w, int num_noise) {
  return effective_sample_size(norm_w) < 0.5 * (num_noise + 1);
}

ParticleSystem make_particle_system(int num_noise, int dim) {
  if (num_noise < 1) throw std::invalid_argument("particle system: num_noise must be >= 1");
  if (dim < 1) throw std::invalid_argument("particle system: dim must be >= 1");
  ParticleSystem sys;
  sys.paths = Matrix::Zero(num_noise + 1, dim);
  return sys;
}

ParticleSystem make_conditional_particle_system(int num_noise, const Sample& x0) {
  ParticleSystem sys = make_particle_system(num_noise, static_cast<int>(x0.size()));
  sys.cond_path = x0;
  return sys;
}

void smc_step(ParticleSystem& sys, const AutoregressiveModel& model,
              const ParameterVector& theta, const ArProposal& q, Rng& rng,
              ResamplePolicy policy) {
  const int particles = sys.particle_count();
  const int num_noise = particles - 1;
  const int d = sys.steps_done;
  if (d >= model.dim()) throw std::invalid_argument("smc_step: sweep already complete");

  bool resample = false;
  if (d > 0) {
    switch (policy) {
      case ResamplePolicy::Adaptive:
        resample = adaptive_resample_decision(sys.norm_w, num_noise);
        break;
      case ResamplePolicy::Always:
        resample = true;
        break;
      case ResamplePolicy::Never:
        resample = false;
        break;
    }
    if (resample) {
      const Matrix old_paths = sys.paths;
      const int first_free = sys.conditional() ? 1 : 0;
      for (int j = first_free; j < particles; ++j) {
        const int a = rng.categorical(sys.norm_w);
        sys.paths.row(j).head(d) = old_paths.row(a).head(d);
      }
    }
  }

  Vector log_w(particles);
  for (int j = 0; j < particles; ++j) {
    const Vector prefix = sys.paths.row(j).head(d).transpose();
    const double xd = (sys.conditional() && j == 0) ? sys.cond_path[d]
                                                    : q.sample_cond(d, prefix, rng);
    sys.paths(j, d) = xd;
    double lw = model.log_unnorm_cond(theta, d, prefix, xd) - q.log_density_cond(d, prefix, xd);
    if (d > 0 && !resample) {
      // Skipped resampling: fold the previous normalised weight back in so
      // the per-step partition factors still multiply to the path estimate.
      lw += std::log(sys.norm_w[j]) + std::log(static_cast<double>(particles));
    }
    log_w[j] = lw;
  }

  const WeightSet w = normalize_log_weights(log_w);
  sys.log_zhat += w.log_sum - std::log(static_cast<double>(particles));
  sys.step_log_w = w.log_unnorm;
  sys.norm_w = w.norm;
  sys.resampled.push_back(resample ? 1 : 0);
  sys.ess_trace.push_back(effective_sample_size(w.norm));
  ++sys.steps_done;
}

namespace {

ParticleSystem run_sweep(ParticleSystem sys, const AutoregressiveModel& model,
                         const ParameterVector& theta, const ArProposal& q, Rng& rng,
                         ResamplePolicy policy, const StepVisitor* visitor) {
  for (int d = 0; d < model.dim(); ++d) {
    smc_step(sys, model, theta, q, rng, policy);
    if (visitor != nullptr) (*visitor)(d, sys);
  }
  return sys;
}

}  // namespace

ParticleSystem smc_sweep(const AutoregressiveModel& model, const ParameterVector& theta,
                         const ArProposal& q, int num_noise, Rng& rng, ResamplePolicy policy,
                         const StepVisitor* visitor) {
  return run_sweep(make_particle_system(num_noise, model.dim()), model, theta, q, rng, policy,
                   visitor);
}

ParticleSystem csmc_sweep(const AutoregressiveModel& model, const ParameterVector& theta,
                          const ArProposal& q, const Sample& x0, int num_noise, Rng& rng,
                          ResamplePolicy policy, const StepVisitor* visitor) {
  if (x0.size() != model.dim()) throw std::invalid_argument("csmc_sweep: conditioning dim");
  return run_sweep(make_conditional_particle_system(num_noise, x0), model, theta, q, rng, policy,
                   visitor);
}

double log_zhat_smc(const ParticleSystem& sys, int dim) {
  if (sys.steps_done != dim) throw std::invalid_argument("log_zhat_smc: sweep not complete");
  return sys.log_zhat;
}

GradientEstimate smc_rnce_gradient(const AutoregressiveModel& model, const ParameterVector& theta,
                                   const ArProposal& q, const Sample& x0, int num_noise, Rng& rng,
                                   ResamplePolicy policy, ParticleSystem* out_system) {
  if (num_noise < 1) throw std::invalid_argument("smc_rnce_gradient: num_noise must be >= 1");
  Vector second = Vector::Zero(model.param_count());
  const StepVisitor visitor = [&](int d, const ParticleSystem& sys) {
    for (int j = 0; j < sys.particle_count(); ++j) {
      const double wj = sys.norm_w[j];
      if (wj == 0.0) continue;
      const Vector prefix = sys.paths.row(j).head(d).transpose();
      model.add_grad_log_unnorm_cond(theta, d, prefix, sys.paths(j, d), wj, second);
      if (q.theta_tied()) {
        q.add_grad_theta_log_density_cond(d, prefix, sys.paths(j, d), -wj, second);
      }
    }
  };
  ParticleSystem sys = csmc_sweep(model, theta, q, x0, num_noise, rng, policy, &visitor);

  GradientEstimate est;
  est.loss = -model.log_unnorm(theta, x0) + sys.log_zhat;
  est.grad = -model.grad_log_unnorm(theta, x0) + second;
  double ess_sum = 0.0, ess_min = sys.ess_trace.empty() ? kNaN : sys.ess_trace[0];
  for (const double e : sys.ess_trace) {
    ess_sum += e;
    ess_min = std::fmin(ess_min, e);
  }
  est.aux.mean_ess = ess_sum / static_cast<double>(sys.ess_trace.size());
  est.aux.min_ess = ess_min;
  if (!all_finite(est.grad)) throw NumericError("smc_rnce_gradient: non-finite estimate");
  if (out_system != nullptr) *out_system = std::move(sys);
  return est;
}

}  // namespace nce
