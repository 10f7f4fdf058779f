#include "trnews/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace trnews {

ParameterSet finite_difference_gradient(const LossFn& loss, const ParameterSet& params, double eps,
                                        const std::vector<std::string>& names) {
  ParameterSet work = params;
  ParameterSet grads;
  auto visit = [&](const std::string& name) {
    Tensor& p = work.get(name);
    Tensor g(p.dims());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double up = loss(work);
      p[i] = saved - eps;
      const double down = loss(work);
      p[i] = saved;
      g[i] = (up - down) / (2.0 * eps);
    }
    grads.add(name, std::move(g));
  };
  if (names.empty()) {
    for (const auto& [name, _] : params) visit(name);
  } else {
    for (const auto& name : names) visit(name);
  }
  return grads;
}

GradientComparison compare_gradients(const ParameterSet& analytic, const ParameterSet& numeric, double floor) {
  GradientComparison out;
  for (const auto& [name, n] : numeric) {
    const Tensor* a = analytic.contains(name) ? &analytic.get(name) : nullptr;
    if (a && !a->same_shape(n)) {
      throw ShapeError("compare_gradients: " + name + " " + shape_string(a->dims()) + " vs " +
                       shape_string(n.dims()));
    }
    for (std::size_t i = 0; i < n.size(); ++i) {
      const double av = a ? (*a)[i] : 0.0;
      const double nv = n[i];
      const double denom = std::max({std::abs(av), std::abs(nv), floor});
      const double err = std::abs(av - nv) / denom;
      ++out.compared;
      if (err > out.max_relative_error || out.worst_parameter.empty()) {
        if (err >= out.max_relative_error) {
          out.max_relative_error = err;
          out.worst_parameter = name;
          out.worst_index = i;
          out.worst_analytic = av;
          out.worst_numeric = nv;
        }
      }
    }
  }
  return out;
}

}  // namespace trnews
