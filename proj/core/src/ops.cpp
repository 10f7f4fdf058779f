#include "trnews/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace trnews {

namespace {

template <typename Message>
void require(bool ok, Message what) {
  if (!ok) throw ShapeError(what());
}

std::string len(std::size_t n) { return "[" + std::to_string(n) + "]"; }

}  // namespace

double dot(ConstSpan a, ConstSpan b) {
  require(a.size() == b.size(), [&] { return "dot: " + len(a.size()) + " vs " + len(b.size()); });
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec matvec(const Tensor& weight, ConstSpan x) {
  require(weight.rank() == 2 && weight.cols() == x.size(), [&] { return "matvec: weight " + shape_string(weight.dims()) + " with input " + len(x.size()); });
  const std::size_t rows = weight.rows();
  const std::size_t cols = weight.cols();
  Vec y(rows, 0.0);
  const double* w = weight.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += wr[c] * x[c];
    y[r] = s;
  }
  return y;
}

Vec affine(const Tensor& weight, const Tensor& bias, ConstSpan x) {
  Vec y = matvec(weight, x);
  require(bias.size() == y.size(), [&] { return "affine: weight " + shape_string(weight.dims()) + " with bias " + shape_string(bias.dims()); });
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bias[i];
  return y;
}

void affine_backward(const Tensor& weight, ConstSpan x, ConstSpan dy, Tensor* dweight, Tensor* dbias,
                     std::span<double> dx) {
  const std::size_t rows = weight.rows();
  const std::size_t cols = weight.cols();
  require(dy.size() == rows && x.size() == cols, [&] { return "affine_backward: weight " + shape_string(weight.dims()) + " input " + len(x.size()) +
              " grad " + len(dy.size()); });
  if (dweight) {
    require(dweight->same_shape(weight), [&] { return "affine_backward: dweight " + shape_string(dweight->dims()); });
    double* g = dweight->data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double d = dy[r];
      if (d == 0.0) continue;
      double* gr = g + r * cols;
      for (std::size_t c = 0; c < cols; ++c) gr[c] += d * x[c];
    }
  }
  if (dbias) {
    require(dbias->size() == rows, [&] { return "affine_backward: dbias " + shape_string(dbias->dims()); });
    for (std::size_t r = 0; r < rows; ++r) (*dbias)[r] += dy[r];
  }
  if (!dx.empty()) {
    require(dx.size() == cols, [&] { return "affine_backward: dx " + len(dx.size()); });
    const double* w = weight.data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double d = dy[r];
      if (d == 0.0) continue;
      const double* wr = w + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dx[c] += d * wr[c];
    }
  }
}

Vec concat(ConstSpan a, ConstSpan b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

Vec relu(ConstSpan x) {
  Vec y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return relu(v); });
  return y;
}

Vec tanh(ConstSpan x) {
  Vec y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return std::tanh(v); });
  return y;
}

void relu_backward_inplace(ConstSpan output, std::span<double> grad) {
  require(output.size() == grad.size(), [&] { return "relu_backward: " + len(output.size()) + " vs " + len(grad.size()); });
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (output[i] <= 0.0) grad[i] = 0.0;
  }
}

void tanh_backward_inplace(ConstSpan output, std::span<double> grad) {
  require(output.size() == grad.size(), [&] { return "tanh_backward: " + len(output.size()) + " vs " + len(grad.size()); });
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - output[i] * output[i];
}

Vec softmax(ConstSpan logits) {
  require(!logits.empty(), [&] { return "softmax: empty input"; });
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

Vec softmax_backward(ConstSpan probs, ConstSpan dprobs) {
  const double inner = dot(probs, dprobs);
  Vec d(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) d[i] = probs[i] * (dprobs[i] - inner);
  return d;
}

Vec mean_rows(const Tensor& matrix, std::span<const std::size_t> rows) {
  require(!rows.empty(), [&] { return "mean_rows: no rows selected"; });
  const std::size_t cols = matrix.cols();
  Vec out(cols, 0.0);
  for (std::size_t r : rows) {
    require(r < matrix.rows(), [&] { return "mean_rows: row " + std::to_string(r) + " outside " + shape_string(matrix.dims()); });
    const double* src = matrix.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += src[c];
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (double& v : out) v *= inv;
  return out;
}

Vec mean(std::span<const Vec> vectors) {
  require(!vectors.empty(), [&] { return "mean: empty list"; });
  Vec out(vectors.front().size(), 0.0);
  for (const Vec& v : vectors) {
    require(v.size() == out.size(), [&] { return "mean: " + len(v.size()) + " vs " + len(out.size()); });
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(vectors.size());
  for (double& v : out) v *= inv;
  return out;
}

Vec weighted_sum(std::span<const Vec> vectors, ConstSpan weights) {
  require(!vectors.empty() && vectors.size() == weights.size(), [&] { return "weighted_sum: " + std::to_string(vectors.size()) + " vectors, " + std::to_string(weights.size()) +
              " weights"; });
  Vec out(vectors.front().size(), 0.0);
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    require(vectors[k].size() == out.size(), [&] { return "weighted_sum: " + len(vectors[k].size()) + " vs " + len(out.size()); });
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[k] * vectors[k][i];
  }
  return out;
}

}  // namespace trnews
