#include "nce/trainer.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace nce {

namespace {
constexpr std::uint64_t kShuffleStream = 0x5AFF1E00ULL;
}

const char* criterion_name(Criterion c) {
  switch (c) {
    case Criterion::MlIs: return "ml-is";
    case Criterion::Rnce: return "rnce";
    case Criterion::Cnce: return "cnce";
    case Criterion::MhCnce: return "mh-cnce";
    case Criterion::PRnce: return "p-rnce";
    case Criterion::PCnce: return "p-cnce";
    case Criterion::PMhCnce: return "p-mh-cnce";
    case Criterion::CdkRnce: return "cdk-rnce";
    case Criterion::CdkCnce: return "cdk-cnce";
    case Criterion::SmcRnce: return "smc-rnce";
  }
  return "?";
}

bool criterion_is_conditional(Criterion c) {
  switch (c) {
    case Criterion::Cnce:
    case Criterion::MhCnce:
    case Criterion::PCnce:
    case Criterion::PMhCnce:
    case Criterion::CdkCnce:
      return true;
    default:
      return false;
  }
}

bool criterion_is_persistent(Criterion c) {
  return c == Criterion::PRnce || c == Criterion::PCnce || c == Criterion::PMhCnce;
}

double lr_schedule(LrScheduleKind kind, double base, double final_value, int iteration,
                   int total) {
  if (iteration < 0 || iteration > total) {
    throw std::invalid_argument("lr_schedule: iteration outside [0, total]");
  }
  const double t = total > 0 ? static_cast<double>(iteration) / total : 0.0;
  switch (kind) {
    case LrScheduleKind::Constant:
      return base;
    case LrScheduleKind::Linear:
      return base + (final_value - base) * t;
    case LrScheduleKind::Cosine:
      return final_value + 0.5 * (base - final_value) * (1.0 + std::cos(std::numbers::pi * t));
  }
  throw std::invalid_argument("lr_schedule: unknown kind");
}

namespace {

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform01() * (i + 1));
    std::swap(idx[i], idx[std::min(j, i)]);
  }
}

struct EffectiveProposals {
  const MarginalProposal* marginal = nullptr;
  const ConditionalProposal* conditional = nullptr;
  const ArProposal* autoregressive = nullptr;
  // Oracle-mode snapshots owned per batch.
  std::unique_ptr<GaussianProposal> gauss_snapshot;
  std::unique_ptr<ArGaussianProposal> ar_snapshot;
  std::unique_ptr<ArJointProposal> ar_joint;
};

}  // namespace

TrainResult train(const UnnormalizedModel& model, const ParameterVector& theta0,
                  const ProposalSet& proposals, std::span<const Sample> data,
                  const TrainConfig& cfg, Rng& rng) {
  if (data.empty()) throw std::invalid_argument("train: data must be non-empty");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (cfg.num_noise < 1) throw std::invalid_argument("train: num_noise must be >= 1");
  if (cfg.mcmc_steps < 1) throw std::invalid_argument("train: mcmc_steps must be >= 1");

  const bool conditional_crit = criterion_is_conditional(cfg.criterion);
  const bool adaptive = cfg.proposal_mode == ProposalMode::Adaptive;
  const bool oracle_model = cfg.proposal_mode == ProposalMode::OracleModel;

  if (adaptive && cfg.criterion != Criterion::Rnce) {
    throw std::invalid_argument("train: adaptive proposals are tied to the ranking criterion");
  }
  if (adaptive && proposals.adaptive == nullptr) {
    throw std::invalid_argument("train: adaptive mode needs an adaptive proposal");
  }
  if (conditional_crit && proposals.conditional == nullptr) {
    throw std::invalid_argument("train: conditional criterion needs a conditional proposal");
  }
  if (conditional_crit && oracle_model) {
    throw std::invalid_argument("train: oracle-model mode is not defined for conditional noise");
  }

  const auto* gauss_model = dynamic_cast<const GaussianDiagModel*>(&model);
  const auto* ar_model = dynamic_cast<const AutoregressiveModel*>(&model);
  const auto* linear_ar = dynamic_cast<const LinearGaussianArModel*>(&model);

  if (cfg.criterion == Criterion::SmcRnce) {
    if (ar_model == nullptr) {
      throw std::invalid_argument("train: smc-rnce needs an autoregressive model");
    }
    if (proposals.autoregressive == nullptr && !oracle_model) {
      throw std::invalid_argument("train: smc-rnce needs an autoregressive proposal");
    }
    if (oracle_model && linear_ar == nullptr) {
      throw std::invalid_argument("train: oracle-model smc-rnce needs a linear AR model");
    }
  } else if (!conditional_crit) {
    const bool has_marginal =
        proposals.marginal != nullptr || proposals.adaptive != nullptr || oracle_model;
    if (!has_marginal) {
      throw std::invalid_argument("train: marginal criterion needs a marginal proposal");
    }
    if (oracle_model && gauss_model == nullptr && linear_ar == nullptr) {
      throw std::invalid_argument("train: oracle-model mode needs exact model sampling");
    }
  }

  const int n = static_cast<int>(data.size());
  const int batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const int total_iters =
      cfg.iterations > 0 ? cfg.iterations : cfg.epochs * batches_per_epoch;
  if (total_iters < 1) throw std::invalid_argument("train: no iterations configured");

  ParameterVector theta = theta0;
  theta.validate();
  ChainStore store;
  MetricTrace trace;

  const int param_count = model.param_count();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  int iter = 0;
  for (int epoch = 0; iter < total_iters; ++epoch) {
    Rng shuffle_rng = rng.child(kShuffleStream + static_cast<std::uint64_t>(epoch));
    shuffle_indices(order, shuffle_rng);

    for (int start = 0; start < n && iter < total_iters; start += cfg.batch_size) {
      const int count = std::min(cfg.batch_size, n - start);
      const double lr = lr_schedule(cfg.schedule, cfg.base_lr, cfg.final_lr, iter, total_iters);

      EffectiveProposals eff;
      eff.marginal = proposals.adaptive != nullptr
                         ? static_cast<const MarginalProposal*>(proposals.adaptive)
                         : proposals.marginal;
      eff.conditional = proposals.conditional;
      eff.autoregressive = proposals.autoregressive;
      if (oracle_model) {
        if (gauss_model != nullptr) {
          eff.gauss_snapshot = std::make_unique<GaussianProposal>(
              Vector(theta.segment("mean")), Vector(theta.segment("scale").cwiseAbs()));
          eff.marginal = eff.gauss_snapshot.get();
        } else if (linear_ar != nullptr) {
          eff.ar_snapshot =
              std::make_unique<ArGaussianProposal>(ArGaussianProposal::from_model(*linear_ar, theta));
          eff.autoregressive = eff.ar_snapshot.get();
          eff.ar_joint = std::make_unique<ArJointProposal>(*eff.ar_snapshot);
          eff.marginal = eff.ar_joint.get();
        }
      }

      Vector grad_acc = Vector::Zero(param_count);
      Vector phi_grad_acc;
      if (adaptive) phi_grad_acc = Vector::Zero(proposals.adaptive->params().size());
      double loss_acc = 0.0;
      double acc_cnce = 0.0, acc_mh = 0.0, ess_acc = 0.0, ess_min = kNaN;
      int aux_pairs = 0, aux_ess = 0;

      Rng iter_rng = rng.child(0xA11CE000ULL + static_cast<std::uint64_t>(iter));
      for (int pos = 0; pos < count; ++pos) {
        const int idx = order[start + pos];
        const Sample& x0 = data[idx];
        Rng datum_rng = iter_rng.child(static_cast<std::uint64_t>(idx));
        if (criterion_is_persistent(cfg.criterion) && cfg.reset_chains_each_iteration) {
          store.erase(idx);
        }

        GradientEstimate est;
        switch (cfg.criterion) {
          case Criterion::MlIs: {
            const auto tail = sample_batch(*eff.marginal, cfg.num_noise, datum_rng);
            est = mlis_gradient(model, theta, *eff.marginal, x0, tail);
            break;
          }
          case Criterion::Rnce: {
            auto tail = sample_batch(*eff.marginal, cfg.num_noise, datum_rng);
            std::vector<Sample> all;
            all.reserve(tail.size() + 1);
            all.push_back(x0);
            for (auto& s : tail) all.push_back(std::move(s));
            est = rnce_gradient(model, theta, *eff.marginal, all);
            if (adaptive) {
              const WeightSet w = importance_weights(model, theta, *eff.marginal, all);
              for (std::size_t j = 0; j < all.size(); ++j) {
                phi_grad_acc -= w.norm[static_cast<Eigen::Index>(j)] *
                                proposals.adaptive->grad_param_log_density(all[j]);
              }
            }
            break;
          }
          case Criterion::CdkRnce:
            est = cdk_rnce_gradient(model, theta, *eff.marginal, x0, cfg.num_noise,
                                    cfg.mcmc_steps, datum_rng);
            break;
          case Criterion::PRnce:
            est = persistent_gradient(PersistentVariant::Rnce, model, theta, eff.marginal,
                                      nullptr, store, idx, x0, cfg.num_noise, datum_rng);
            break;
          case Criterion::Cnce:
          case Criterion::MhCnce: {
            std::vector<Sample> tail;
            tail.reserve(cfg.num_noise);
            for (int j = 0; j < cfg.num_noise; ++j) {
              tail.push_back(eff.conditional->sample_given(x0, datum_rng));
            }
            est = cfg.criterion == Criterion::Cnce
                      ? cnce_gradient(model, theta, *eff.conditional, x0, tail)
                      : mh_cnce_gradient(model, theta, *eff.conditional, x0, tail);
            break;
          }
          case Criterion::CdkCnce:
            est = cdk_cnce_gradient(model, theta, *eff.conditional, x0, cfg.num_noise,
                                    cfg.mcmc_steps, datum_rng);
            break;
          case Criterion::PCnce:
          case Criterion::PMhCnce:
            est = persistent_gradient(cfg.criterion == Criterion::PCnce
                                          ? PersistentVariant::Cnce
                                          : PersistentVariant::MhCnce,
                                      model, theta, nullptr, eff.conditional, store, idx, x0,
                                      cfg.num_noise, datum_rng);
            break;
          case Criterion::SmcRnce:
            est = smc_rnce_gradient(*ar_model, theta, *eff.autoregressive, x0, cfg.num_noise,
                                    datum_rng, cfg.smc_policy);
            break;
        }

        grad_acc += est.grad;
        loss_acc += est.loss;
        if (std::isfinite(est.aux.mean_accept_cnce)) {
          acc_cnce += est.aux.mean_accept_cnce;
          acc_mh += est.aux.mean_accept_mh;
          ++aux_pairs;
        }
        if (std::isfinite(est.aux.mean_ess)) {
          ess_acc += est.aux.mean_ess;
          ess_min = std::isnan(ess_min) ? est.aux.min_ess : std::fmin(ess_min, est.aux.min_ess);
          ++aux_ess;
        }
      }

      const double inv = 1.0 / static_cast<double>(count);
      grad_acc *= inv;
      loss_acc *= inv;
      if (!all_finite(grad_acc)) {
        throw NumericError("train: non-finite batch gradient at iteration " +
                           std::to_string(iter + 1) + " (" + criterion_name(cfg.criterion) + ")");
      }
      theta.values() -= lr * grad_acc;
      if (!all_finite(theta.values())) {
        throw NumericError("train: parameters became non-finite at iteration " +
                           std::to_string(iter + 1));
      }
      if (adaptive) {
        phi_grad_acc *= inv;
        if (!all_finite(phi_grad_acc)) {
          throw NumericError("train: non-finite proposal gradient at iteration " +
                             std::to_string(iter + 1));
        }
        const double plr =
            cfg.proposal_lr < 0.0
                ? lr
                : lr_schedule(cfg.schedule, cfg.proposal_lr, cfg.proposal_lr, iter, total_iters);
        proposals.adaptive->params().values() -= plr * phi_grad_acc;
        proposals.adaptive->params().validate();
      }

      ++iter;
      if (iter % cfg.log_every == 0 || iter == total_iters) {
        IterationRecord rec;
        rec.iteration = iter;
        rec.loss = loss_acc;
        rec.lr = lr;
        rec.theta = theta.values();
        if (aux_pairs > 0) {
          rec.aux.mean_accept_cnce = acc_cnce / aux_pairs;
          rec.aux.mean_accept_mh = acc_mh / aux_pairs;
        }
        if (aux_ess > 0) {
          rec.aux.mean_ess = ess_acc / aux_ess;
          rec.aux.min_ess = ess_min;
        }
        trace.records.push_back(std::move(rec));
      }
    }
  }

  return TrainResult{std::move(theta), std::move(trace)};
}

}  // namespace nce
