#ifndef GRAPHPARSE_TENSOR_HPP_
#define GRAPHPARSE_TENSOR_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "graphparse/errors.hpp"

namespace graphparse {

// Dense row-major matrix. Vectors are 1 x n.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols)
      throw ContractViolation("tensor data length " + std::to_string(data_.size()) +
                              " does not match shape " + std::to_string(rows) + "x" +
                              std::to_string(cols));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  std::vector<std::size_t> shape() const { return {rows_, cols_}; }
  std::string shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  T operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Tensor& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter(std::string n, Tensor<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}
};

// Named parameters in registration order. Addresses are stable.
template <typename T>
class ParamSet {
 public:
  Parameter<T>& add(const std::string& name, Tensor<T> value) {
    if (find(name)) throw ContractViolation("duplicate parameter '" + name + "'");
    params_.push_back(std::make_unique<Parameter<T>>(name, std::move(value)));
    return *params_.back();
  }
  Parameter<T>* find(const std::string& name) {
    for (auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }
  const Parameter<T>* find(const std::string& name) const {
    for (const auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }
  Parameter<T>& at(const std::string& name) {
    if (auto* p = find(name)) return *p;
    throw ContractViolation("no parameter '" + name + "'");
  }
  const Parameter<T>& at(const std::string& name) const {
    if (const auto* p = find(name)) return *p;
    throw ContractViolation("no parameter '" + name + "'");
  }

  std::size_t count() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
  }
  void zero_grad() {
    for (auto& p : params_) p->grad.fill(T(0));
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

}  // namespace graphparse

#endif  // GRAPHPARSE_TENSOR_HPP_
