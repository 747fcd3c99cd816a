#include "joco/numgrad/param_set.hpp"

#include <stdexcept>

namespace joco::ng {

std::size_t ParamSet::add(std::string name, Tensor value) {
  if (index_.contains(name)) {
    throw std::invalid_argument("duplicate parameter '" + name + "'");
  }
  const std::size_t i = entries_.size();
  Tensor grad(value.shape());
  index_.emplace(name, i);
  entries_.push_back({std::move(name), std::move(value), std::move(grad)});
  return i;
}

bool ParamSet::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

std::size_t ParamSet::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  }
  return it->second;
}

void ParamSet::zero_grad() {
  for (auto& e : entries_) e.grad.fill(0.0);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

std::vector<std::size_t> ParamSet::select(
    const std::vector<std::string>& prefixes) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (const auto& p : prefixes) {
      if (entries_[i].name.starts_with(p)) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

bool ParamSet::same_values(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name ||
        !(entries_[i].value == other.entries_[i].value)) {
      return false;
    }
  }
  return true;
}

}  // namespace joco::ng
