#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "trnews/tensor.hpp"

namespace trnews {

using Rng = std::mt19937_64;

/// Seed for a named sub-stream of `root` (e.g. "split", "init", "shuffle").
/// `index` distinguishes repeated draws of the same stream, such as epochs.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

void uniform_init(Tensor& t, double low, double high, Rng& rng);
/// U(-a, a) with a = sqrt(6 / (fan_in + fan_out)); `t` is [fan_out x fan_in].
void xavier_uniform(Tensor& t, Rng& rng);

}  // namespace trnews
