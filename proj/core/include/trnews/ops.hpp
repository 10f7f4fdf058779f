#pragma once

// Forward and backward kernels for the dense primitives used by the networks
// and translators. Backward functions accumulate (+=) into their outputs.

#include <cstddef>
#include <span>
#include <vector>

#include "trnews/tensor.hpp"

namespace trnews {

using Vec = std::vector<double>;
using ConstSpan = std::span<const double>;

double dot(ConstSpan a, ConstSpan b);

/// y = W x + b with W of shape [out x in].
Vec affine(const Tensor& weight, const Tensor& bias, ConstSpan x);
/// y = W x (no bias).
Vec matvec(const Tensor& weight, ConstSpan x);

/// dW += dy x^T, db += dy, dx += W^T dy. Null/empty outputs are skipped.
void affine_backward(const Tensor& weight, ConstSpan x, ConstSpan dy, Tensor* dweight, Tensor* dbias,
                     std::span<double> dx);

Vec concat(ConstSpan a, ConstSpan b);

double sigmoid(double x);
double relu(double x);
Vec relu(ConstSpan x);
Vec tanh(ConstSpan x);

/// Multiplies `grad` in place by the activation derivative given the forward output.
void relu_backward_inplace(ConstSpan output, std::span<double> grad);
void tanh_backward_inplace(ConstSpan output, std::span<double> grad);

/// Numerically stable softmax; the maximum is subtracted before exponentiation.
Vec softmax(ConstSpan logits);
/// dlogits = p * (dp - <p, dp>).
Vec softmax_backward(ConstSpan probs, ConstSpan dprobs);

/// Mean of the selected rows of `matrix`.
Vec mean_rows(const Tensor& matrix, std::span<const std::size_t> rows);
/// Mean of a list of equally sized vectors.
Vec mean(std::span<const Vec> vectors);
/// sum_i weights[i] * vectors[i].
Vec weighted_sum(std::span<const Vec> vectors, ConstSpan weights);

}  // namespace trnews
