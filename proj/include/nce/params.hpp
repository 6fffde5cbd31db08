#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nce/math.hpp"

namespace nce {

/// Named contiguous slices of a flat parameter vector.
class ParamLayout {
 public:
  ParamLayout() = default;
  ParamLayout(std::initializer_list<std::pair<std::string, int>> segments);

  void append(std::string name, int size);

  int size() const { return total_; }
  int offset(std::string_view name) const;
  int segment_size(std::string_view name) const;
  bool has(std::string_view name) const;

 private:
  struct Segment {
    std::string name;
    int offset;
    int size;
  };
  const Segment& find(std::string_view name) const;

  std::vector<Segment> segments_;
  int total_ = 0;
};

/// Flat real vector of model (or proposal) parameters with a named-slice
/// layout. Entries are expected to stay finite; validate() checks.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(ParamLayout layout)
      : layout_(std::move(layout)), values_(Vector::Zero(layout_.size())) {}
  ParameterVector(ParamLayout layout, Vector values);

  int size() const { return static_cast<int>(values_.size()); }
  Vector& values() { return values_; }
  const Vector& values() const { return values_; }
  double& operator[](int i) { return values_[i]; }
  double operator[](int i) const { return values_[i]; }

  const ParamLayout& layout() const { return layout_; }

  Eigen::VectorBlock<Vector> segment(std::string_view name) {
    return values_.segment(layout_.offset(name), layout_.segment_size(name));
  }
  Eigen::VectorBlock<const Vector> segment(std::string_view name) const {
    return values_.segment(layout_.offset(name), layout_.segment_size(name));
  }

  void validate() const;

 private:
  ParamLayout layout_;
  Vector values_;
};

}  // namespace nce
