#include "nce/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nce {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finaliser over the combined state
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  if (!queued_.empty()) {
    const double u = queued_.front();
    queued_.pop_front();
    return u;
  }
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Vector Rng::normal_vector(int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

int Rng::categorical(const Vector& weights) {
  if (weights.size() == 0) throw std::invalid_argument("categorical: empty weights");
  double total = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("categorical: negative or nan weight");
    total += weights[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("categorical: all weights zero");
  const double u = uniform01() * total;
  double c = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    c += weights[i];
    if (u < c) return i;
  }
  return static_cast<int>(weights.size()) - 1;
}

void Rng::queue_uniforms(std::span<const double> u) {
  queued_.insert(queued_.end(), u.begin(), u.end());
}

}  // namespace nce
