#include "nce/model.hpp"

#include <stdexcept>

namespace nce {

double UnnormalizedModel::log_partition(const ParameterVector&) const {
  throw std::logic_error("log_partition: unsupported for this model");
}

Sample UnnormalizedModel::sample_exact(const ParameterVector&, Rng&) const {
  throw std::logic_error("sample_exact: unsupported for this model");
}

void UnnormalizedModel::check_input(const ParameterVector& theta, const Sample& x) const {
  if (x.size() != dim()) throw std::invalid_argument("sample dimension mismatch");
  if (theta.size() != param_count()) throw std::invalid_argument("parameter count mismatch");
}

}  // namespace nce
