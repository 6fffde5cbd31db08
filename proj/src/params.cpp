#include "nce/params.hpp"

#include <stdexcept>

namespace nce {

ParamLayout::ParamLayout(std::initializer_list<std::pair<std::string, int>> segments) {
  for (const auto& [name, size] : segments) append(name, size);
}

void ParamLayout::append(std::string name, int size) {
  if (size <= 0) throw std::invalid_argument("ParamLayout: segment size must be positive");
  if (has(name)) throw std::invalid_argument("ParamLayout: duplicate segment '" + name + "'");
  segments_.push_back(Segment{std::move(name), total_, size});
  total_ += size;
}

const ParamLayout::Segment& ParamLayout::find(std::string_view name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw std::invalid_argument("ParamLayout: unknown segment '" + std::string(name) + "'");
}

int ParamLayout::offset(std::string_view name) const { return find(name).offset; }

int ParamLayout::segment_size(std::string_view name) const { return find(name).size; }

bool ParamLayout::has(std::string_view name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return true;
  }
  return false;
}

ParameterVector::ParameterVector(ParamLayout layout, Vector values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (values_.size() != layout_.size()) {
    throw std::invalid_argument("ParameterVector: values length does not match layout");
  }
}

void ParameterVector::validate() const {
  if (values_.size() != layout_.size()) {
    throw std::invalid_argument("ParameterVector: values length does not match layout");
  }
  if (!all_finite(values_)) {
    throw std::invalid_argument("ParameterVector: non-finite entry");
  }
}

}  // namespace nce
