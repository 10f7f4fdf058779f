#include <gtest/gtest.h>

#include "trnews/tensor.hpp"

using namespace trnews;

TEST(Tensor, ShapeAndFill) {
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.size(), 6u);
  for (double v : t.values()) EXPECT_EQ(v, 1.5);
  t.at(1, 2) = 4.0;
  EXPECT_EQ(t[5], 4.0);
  EXPECT_EQ(t.row(1)[2], 4.0);
}

TEST(Tensor, ValueCountMustMatchShape) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor::vector({1, 2}).rows(), ShapeError);
}

TEST(Tensor, FiniteCheck) {
  Tensor t = Tensor::vector({1.0, 2.0});
  EXPECT_TRUE(t.all_finite());
  t[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
}

TEST(ParameterSet, AddRejectsDuplicates) {
  ParameterSet p;
  p.add("a", Tensor::vector({1.0}));
  EXPECT_THROW(p.add("a", Tensor::vector({2.0})), std::invalid_argument);
  EXPECT_THROW(p.get("missing"), std::out_of_range);
}

TEST(ParameterSet, PrefixViewsAndAxpy) {
  ParameterSet p;
  p.add("net.w", Tensor::vector({1.0, 2.0}));
  p.add("translator.h", Tensor::vector({3.0}));
  EXPECT_EQ(p.with_prefix("translator.").size(), 1u);
  EXPECT_EQ(p.without_prefix("translator.").size(), 1u);
  EXPECT_EQ(p.scalar_count(), 3u);

  ParameterSet g = p.zeros_like();
  g.get("net.w")[1] = 1.0;
  p.axpy(-2.0, g);
  EXPECT_EQ(p.get("net.w")[1], 0.0);
  EXPECT_EQ(p.get("net.w")[0], 1.0);
  g.set_zero();
  EXPECT_EQ(g.get("net.w")[1], 0.0);
}
