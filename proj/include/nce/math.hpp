#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace nce {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum_i exp(v_i)) guarded against overflow; -inf for empty input.
double log_sum_exp(const Vector& v);

/// softmax(v), computed through log_sum_exp so extreme inputs stay sane.
Vector softmax(const Vector& v);

/// log(1 + exp(x)), stable for large |x|.
inline double softplus(double x) {
  return std::fmax(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool all_finite(const Vector& v);

/// Compensated (Kahan) accumulator for long deterministic sums.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// Per-coordinate Kahan accumulation for vector-valued sums.
class KahanVectorSum {
 public:
  explicit KahanVectorSum(int n) : s_(Vector::Zero(n)), c_(Vector::Zero(n)) {}
  void add(const Vector& x);
  const Vector& value() const { return s_; }

 private:
  Vector s_;
  Vector c_;
};

/// Type-7 (linear interpolation) quantile, p in [0, 1]. Copies and sorts.
double percentile(std::vector<double> values, double p);

inline double median(std::vector<double> values) {
  return percentile(std::move(values), 0.5);
}

}  // namespace nce
