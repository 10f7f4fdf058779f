#include "trnews/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace trnews {

namespace {

std::size_t element_count(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

std::string shape_string(std::span<const std::size_t> dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << 'x';
    os << dims[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(std::vector<std::size_t> dims, double fill)
    : dims_(std::move(dims)), values_(element_count(dims_), fill) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  if (values_.size() != element_count(dims_)) {
    throw ShapeError("tensor of shape " + shape_string(dims_) + " given " +
                     std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (dims_.size() != 2) throw ShapeError("rows() on non-matrix " + shape_string(dims_));
  return dims_[0];
}

std::size_t Tensor::cols() const {
  if (dims_.size() != 2) throw ShapeError("cols() on non-matrix " + shape_string(dims_));
  return dims_[1];
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<double>(values_).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(values_).subspan(r * c, c);
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor& ParameterSet::add(const std::string& name, Tensor t) {
  auto [it, inserted] = tensors_.emplace(name, std::move(t));
  if (!inserted) throw std::invalid_argument("duplicate parameter name: " + name);
  return it->second;
}

Tensor& ParameterSet::get(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParameterSet::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors_) n += t.size();
  return n;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (const auto& [name, t] : tensors_) out.add(name, Tensor(t.dims()));
  return out;
}

ParameterSet ParameterSet::with_prefix(const std::string& prefix) const {
  ParameterSet out;
  for (const auto& [name, t] : tensors_) {
    if (name.starts_with(prefix)) out.add(name, t);
  }
  return out;
}

ParameterSet ParameterSet::without_prefix(const std::string& prefix) const {
  ParameterSet out;
  for (const auto& [name, t] : tensors_) {
    if (!name.starts_with(prefix)) out.add(name, t);
  }
  return out;
}

void ParameterSet::set_zero() {
  for (auto& [_, t] : tensors_) t.fill(0.0);
}

void ParameterSet::axpy(double scale, const ParameterSet& other) {
  for (const auto& [name, src] : other.tensors_) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) continue;
    if (!it->second.same_shape(src)) {
      throw ShapeError("axpy on " + name + ": " + shape_string(it->second.dims()) + " vs " +
                       shape_string(src.dims()));
    }
    auto dst = it->second.values();
    auto s = src.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * s[i];
  }
}

}  // namespace trnews
