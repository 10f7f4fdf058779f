#include <gtest/gtest.h>

#include <set>

#include "trnews/random.hpp"

using namespace trnews;

TEST(Random, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(42, "split"), derive_seed(42, "split"));
  std::set<std::uint64_t> seen;
  for (const char* name : {"split", "negatives", "init", "shuffle", "eval-negatives"}) {
    for (std::uint64_t i = 0; i < 4; ++i) seen.insert(derive_seed(42, name, i));
  }
  EXPECT_EQ(seen.size(), 20u);
  EXPECT_NE(derive_seed(1, "split"), derive_seed(2, "split"));
}

TEST(Random, XavierBounds) {
  Tensor t({30, 50});
  Rng rng = make_rng(5, "init");
  xavier_uniform(t, rng);
  const double a = std::sqrt(6.0 / 80.0);
  double lo = 1;
  double hi = -1;
  for (double v : t.values()) {
    EXPECT_LE(std::abs(v), a);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LT(lo, -0.8 * a);
  EXPECT_GT(hi, 0.8 * a);
}

TEST(Random, UniformInitRange) {
  Tensor t({1000});
  Rng rng = make_rng(5, "init");
  uniform_init(t, -0.05, 0.05, rng);
  for (double v : t.values()) {
    EXPECT_GE(v, -0.05);
    EXPECT_LT(v, 0.05);
  }
}
