#include "nce/math.hpp"

#include <algorithm>
#include <stdexcept>

namespace nce {

double log_sum_exp(const Vector& v) {
  if (v.size() == 0) return kNegInf;
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf, or a nan/inf poisons the sum
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

Vector softmax(const Vector& v) {
  const double lse = log_sum_exp(v);
  Vector out(v.size());
  for (int i = 0; i < v.size(); ++i) out[i] = std::exp(v[i] - lse);
  return out;
}

bool all_finite(const Vector& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

void KahanVectorSum::add(const Vector& x) {
  if (x.size() != s_.size()) throw std::invalid_argument("KahanVectorSum: size mismatch");
  for (int i = 0; i < x.size(); ++i) {
    const double y = x[i] - c_[i];
    const double t = s_[i] + y;
    c_[i] = (t - s_[i]) - y;
    s_[i] = t;
  }
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty input");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("percentile: p outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace nce
