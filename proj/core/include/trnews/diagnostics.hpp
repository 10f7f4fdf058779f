#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "trnews/gradcheck.hpp"

namespace trnews {

struct LossCheck {
  std::string name;
  GradientComparison comparison;
  bool passed = false;
};

struct GradientCheckOptions {
  std::size_t dim = 8;
  std::size_t history_length = 3;
  double eps = 1e-5;
  double tolerance = 1e-4;
  /// Denominator floor of the relative error.
  double floor = 1e-6;
  std::size_t batch_size = 6;
};

/// Builds a tiny synthetic corpus and model from `seed` and compares
/// analytic against central-difference gradients for the joint network
/// loss, the translator loss of every strategy, and the end-to-end sum.
std::vector<LossCheck> run_gradient_checks(std::uint64_t seed, const GradientCheckOptions& options = {});

/// "PASS name max_rel=... (n entries)" lines.
void write_gradient_checks(std::ostream& out, const std::vector<LossCheck>& checks);

}  // namespace trnews
