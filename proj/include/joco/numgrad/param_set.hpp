#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "joco/numgrad/tensor.hpp"

namespace joco::ng {

/// Named trainable tensors, iterated in insertion order, each with a gradient
/// accumulator of the same shape.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
  };

  /// Adds a parameter; the name must be new.
  std::size_t add(std::string name, Tensor value);

  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  Tensor& value(std::string_view name) { return entries_[index_of(name)].value; }
  const Tensor& value(std::string_view name) const {
    return entries_[index_of(name)].value;
  }
  const Tensor& grad(std::string_view name) const {
    return entries_[index_of(name)].grad;
  }

  Entry& at(std::size_t i) { return entries_[i]; }
  const Entry& at(std::size_t i) const { return entries_[i]; }
  std::size_t size() const { return entries_.size(); }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();

  /// Total scalar count across all parameters.
  std::size_t scalar_count() const;

  /// Entry indices whose names start with any of `prefixes`.
  std::vector<std::size_t> select(const std::vector<std::string>& prefixes) const;

  /// Bitwise equality of names and values (gradients ignored).
  bool same_values(const ParamSet& other) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace joco::ng
