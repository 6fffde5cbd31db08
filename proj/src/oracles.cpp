#include "nce/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace nce {

namespace {

constexpr std::size_t kOutcomeCap = 1'000'000;

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void check_instance(const EnumerationInstance& inst) {
  if (inst.model == nullptr) throw std::invalid_argument("enumeration: model missing");
  const int k = inst.model->support_size();
  const bool conditional = inst.conditional_probs.size() > 0;
  if (conditional) {
    if (inst.conditional_probs.rows() != k || inst.conditional_probs.cols() != k) {
      throw std::invalid_argument("enumeration: conditional table must be K x K");
    }
    if (inst.law == ConditioningLaw::JointIndex) {
      throw std::invalid_argument("enumeration: JointIndex law needs a marginal proposal");
    }
  } else if (inst.marginal_probs.size() != k) {
    throw std::invalid_argument("enumeration: marginal table must have K entries");
  }
  if (inst.law == ConditioningLaw::X0FromTable && inst.x0_probs.size() != k) {
    throw std::invalid_argument("enumeration: x0 table must have K entries");
  }
  if (inst.num_noise < 1) throw std::invalid_argument("enumeration: num_noise must be >= 1");
  if (inst.outcome_count() > kOutcomeCap) {
    throw std::invalid_argument("enumeration: outcome count exceeds cap");
  }
}

// Walks all candidate tuples for a fixed (z, i0) pattern, multiplying in
// the i.i.d. proposal probabilities for the non-conditioning slots.
template <typename Visit>
void for_each_outcome(const EnumerationInstance& inst, const Visit& visit) {
  const int k = inst.model->support_size();
  const int total = inst.num_noise + 1;
  const bool conditional = inst.conditional_probs.size() > 0;
  const Vector model_probs = inst.model->probabilities(inst.theta);

  std::vector<int> idx(total, 0);
  const auto noise_prob = [&](int slot, int value, int cond_value) {
    (void)slot;
    return conditional ? inst.conditional_probs(cond_value, value) : inst.marginal_probs[value];
  };

  const auto walk_tuple = [&](int z, double base_prob, bool fix_i0, int i0) {
    std::fill(idx.begin(), idx.end(), 0);
    if (fix_i0) idx[0] = i0;
    while (true) {
      double prob = base_prob;
      for (int s = 0; s < total; ++s) {
        if (fix_i0 && s == 0) continue;
        if (s == z) {
          prob *= model_probs[idx[s]];
        } else {
          prob *= noise_prob(s, idx[s], idx[0]);
        }
      }
      visit(z, idx, prob);

      int pos = total - 1;
      while (pos >= (fix_i0 ? 1 : 0) && ++idx[pos] == k) idx[pos--] = 0;
      if (pos < (fix_i0 ? 1 : 0)) break;
    }
  };

  switch (inst.law) {
    case ConditioningLaw::X0FromModel:
      walk_tuple(/*z=*/0, 1.0, /*fix_i0=*/false, 0);
      break;
    case ConditioningLaw::X0FromTable:
      // slot 0 drawn from the given table, slots 1..J from the proposal
      std::fill(idx.begin(), idx.end(), 0);
      for (int i0 = 0; i0 < k; ++i0) {
        walk_tuple(/*z=*/-1, inst.x0_probs[i0], /*fix_i0=*/true, i0);
      }
      break;
    case ConditioningLaw::X0Fixed:
      walk_tuple(/*z=*/-1, 1.0, /*fix_i0=*/true, inst.x0_index);
      break;
    case ConditioningLaw::JointIndex:
      for (int z = 0; z < total; ++z) {
        walk_tuple(z, 1.0 / static_cast<double>(total), /*fix_i0=*/false, 0);
      }
      break;
  }
}

}  // namespace

std::size_t EnumerationInstance::outcome_count() const {
  const std::size_t k = model == nullptr ? 0 : static_cast<std::size_t>(model->support_size());
  const std::size_t tuples = ipow(k, num_noise + 1);
  switch (law) {
    case ConditioningLaw::X0FromModel:
    case ConditioningLaw::X0FromTable:
      return tuples;
    case ConditioningLaw::X0Fixed:
      return ipow(k, num_noise);
    case ConditioningLaw::JointIndex:
      return tuples * static_cast<std::size_t>(num_noise + 1);
  }
  return tuples;
}

double enumerate_expectation(const EnumerationInstance& inst, const ScalarStatistic& stat) {
  check_instance(inst);
  KahanSum acc;
  for_each_outcome(inst, [&](int z, const std::vector<int>& idx, double prob) {
    acc.add(prob * stat(std::max(z, 0), std::span<const int>(idx)));
  });
  return acc.value();
}

Vector enumerate_expectation(const EnumerationInstance& inst, int out_dim,
                             const VectorStatistic& stat) {
  check_instance(inst);
  KahanVectorSum acc(out_dim);
  for_each_outcome(inst, [&](int z, const std::vector<int>& idx, double prob) {
    acc.add(prob * stat(std::max(z, 0), std::span<const int>(idx)));
  });
  return acc.value();
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_gradient: step must be > 0");
  Vector g(x.size());
  Vector p = x;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    p[i] = xi + step;
    const double hi = f(p);
    p[i] = xi - step;
    const double lo = f(p);
    p[i] = xi;
    if (!std::isfinite(hi) || !std::isfinite(lo)) {
      throw std::invalid_argument("finite_difference_gradient: non-finite function value");
    }
    g[i] = (hi - lo) / (2.0 * step);
  }
  return g;
}

double gaussian_diag_kl(const Vector& mean_p, const Vector& scale_p, const Vector& mean_q,
                        const Vector& scale_q) {
  const auto n = mean_p.size();
  if (scale_p.size() != n || mean_q.size() != n || scale_q.size() != n) {
    throw std::invalid_argument("gaussian_diag_kl: length mismatch");
  }
  double kl = 0.0;
  for (Eigen::Index d = 0; d < n; ++d) {
    const double sp = scale_p[d], sq = scale_q[d];
    if (!(sp > 0.0) || !(sq > 0.0)) {
      throw std::invalid_argument("gaussian_diag_kl: scales must be positive");
    }
    const double dm = mean_p[d] - mean_q[d];
    kl += std::log(sq / sp) + (sp * sp + dm * dm) / (2.0 * sq * sq) - 0.5;
  }
  return kl;
}

}  // namespace nce
