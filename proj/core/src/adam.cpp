#include "trnews/adam.hpp"

#include <cmath>
#include <sstream>

namespace trnews {

namespace {

std::string describe(const std::string& parameter, std::size_t index, double value) {
  std::ostringstream os;
  os << "non-finite gradient " << value << " in parameter '" << parameter << "' at index " << index;
  return os.str();
}

}  // namespace

NonFiniteGradient::NonFiniteGradient(const std::string& parameter, std::size_t index, double value)
    : std::runtime_error(describe(parameter, index, value)), parameter_(parameter) {}

void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state, const AdamConfig& config) {
  for (const auto& [name, g] : grads) {
    const Tensor& p = params.get(name);
    if (!p.same_shape(g)) {
      throw ShapeError("adam_step: parameter " + name + " " + shape_string(p.dims()) + " vs gradient " +
                       shape_string(g.dims()));
    }
    auto gv = g.values();
    for (std::size_t i = 0; i < gv.size(); ++i) {
      if (!std::isfinite(gv[i])) throw NonFiniteGradient(name, i, gv[i]);
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);

  for (const auto& [name, g] : grads) {
    Tensor& p = params.get(name);
    auto [m_it, m_new] = state.first_moment.try_emplace(name, Tensor(p.dims()));
    auto [v_it, v_new] = state.second_moment.try_emplace(name, Tensor(p.dims()));
    double* m = m_it->second.data();
    double* v = v_it->second.data();
    double* x = p.data();
    const double* gd = g.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * gd[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * gd[i] * gd[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      x[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace trnews
