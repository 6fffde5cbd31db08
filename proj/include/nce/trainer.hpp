#pragma once

#include "nce/kernels.hpp"
#include "nce/smc.hpp"

namespace nce {

enum class Criterion {
  MlIs,
  Rnce,
  Cnce,
  MhCnce,
  PRnce,
  PCnce,
  PMhCnce,
  CdkRnce,
  CdkCnce,
  SmcRnce,
};

const char* criterion_name(Criterion c);
bool criterion_is_conditional(Criterion c);
bool criterion_is_persistent(Criterion c);

enum class LrScheduleKind { Constant, Linear, Cosine };

/// Learning rate at `iteration` of `total`. Linear interpolates from base to
/// final_value over the run; cosine anneals between the same endpoints.
double lr_schedule(LrScheduleKind kind, double base, double final_value, int iteration,
                   int total);

enum class ProposalMode {
  Fixed,        // use the supplied proposal as-is
  Adaptive,     // cross-entropy adaptation of the supplied adaptive proposal
  OracleModel,  // rebuild the proposal from the current model parameters
};

struct TrainConfig {
  Criterion criterion = Criterion::Rnce;
  int num_noise = 10;  // J
  int mcmc_steps = 1;  // k, CD-k criteria only
  int batch_size = 20;
  int epochs = 0;
  int iterations = 0;  // overrides epochs when > 0
  LrScheduleKind schedule = LrScheduleKind::Constant;
  double base_lr = 0.01;
  double final_lr = 0.001;
  double proposal_lr = -1.0;  // < 0: follow the model's schedule
  ProposalMode proposal_mode = ProposalMode::Fixed;
  ResamplePolicy smc_policy = ResamplePolicy::Adaptive;
  int log_every = 1;
  /// Diagnostic: wipe persistent chains before every use, which must make
  /// the P-* criteria reproduce their non-persistent counterparts exactly.
  bool reset_chains_each_iteration = false;
};

struct IterationRecord {
  int iteration = 0;  // 1-based, captured after the parameter update
  double loss = kNaN;
  double lr = kNaN;
  Vector theta;
  AuxDiagnostics aux;
};

struct MetricTrace {
  std::vector<IterationRecord> records;
};

/// Which proposals a run has available; the criterion decides which ones
/// must be present. When `adaptive` is set it doubles as the marginal.
struct ProposalSet {
  const MarginalProposal* marginal = nullptr;
  const ConditionalProposal* conditional = nullptr;
  const ArProposal* autoregressive = nullptr;
  AdaptiveMarginalProposal* adaptive = nullptr;
};

struct TrainResult {
  ParameterVector theta;
  MetricTrace trace;
};

/// Minibatch SGD over the chosen criterion. Shuffles without replacement
/// each epoch; every randomness stream is derived from rng's seed and the
/// (epoch, iteration, datum) position, so runs are reproducible and
/// independent of evaluation order. Throws NumericError on a non-finite
/// batch gradient and std::invalid_argument on a criterion/proposal
/// mismatch.
TrainResult train(const UnnormalizedModel& model, const ParameterVector& theta0,
                  const ProposalSet& proposals, std::span<const Sample> data,
                  const TrainConfig& cfg, Rng& rng);

}  // namespace nce
