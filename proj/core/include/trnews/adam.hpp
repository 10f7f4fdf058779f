#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "trnews/tensor.hpp"

namespace trnews {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moments per parameter name plus the shared step counter.
struct AdamState {
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
  std::uint64_t step = 0;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  NonFiniteGradient(const std::string& parameter, std::size_t index, double value);
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

/// One bias-corrected Adam update over every parameter named in `grads`.
/// Parameters absent from `grads` are left untouched. The step counter is
/// incremented before bias correction. Throws NonFiniteGradient, without
/// modifying anything, if any gradient entry is NaN or infinite.
void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state,
               const AdamConfig& config = {});

}  // namespace trnews
