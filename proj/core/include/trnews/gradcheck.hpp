#pragma once

#include <functional>
#include <string>
#include <vector>

#include "trnews/tensor.hpp"

namespace trnews {

using LossFn = std::function<double(const ParameterSet&)>;

/// Central differences (f(p+eps) - f(p-eps)) / 2eps for every coordinate of
/// the parameters named in `names` (all parameters when `names` is empty).
ParameterSet finite_difference_gradient(const LossFn& loss, const ParameterSet& params, double eps = 1e-5,
                                        const std::vector<std::string>& names = {});

struct GradientComparison {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t compared = 0;
};

/// Elementwise |a - n| / max(|a|, |n|, floor), maximised over every entry of
/// `numeric`. Entries missing from `analytic` count as zero.
GradientComparison compare_gradients(const ParameterSet& analytic, const ParameterSet& numeric,
                                     double floor = 1e-8);

}  // namespace trnews
