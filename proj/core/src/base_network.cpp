#include "trnews/base_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace trnews {

void add_embedding(ParameterSet& params, std::size_t vocab_size, std::size_t dim, Rng& rng) {
  Tensor e({vocab_size, dim});
  uniform_init(e, -0.05, 0.05, rng);
  if (vocab_size > kPadId) {
    for (double& v : e.row(kPadId)) v = 0.0;
  }
  params.add(kEmbeddingName, std::move(e));
}

Vec news_encode(const ParameterSet& params, std::span<const WordId> tokens) {
  if (tokens.empty()) throw std::invalid_argument("news_encode: article has no tokens");
  return mean_rows(params.get(kEmbeddingName), tokens);
}

void news_encode_backward(std::span<const WordId> tokens, ConstSpan d_repr, ParameterSet& grads) {
  if (!grads.contains(kEmbeddingName) || tokens.empty()) return;
  Tensor& g = grads.get(kEmbeddingName);
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (WordId w : tokens) {
    if (w == kPadId) continue;
    auto row = g.row(w);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] += d_repr[k] * inv;
  }
}

Vec user_encode_unconditioned(std::span<const Vec> history) {
  if (history.empty()) throw std::invalid_argument("user_encode_unconditioned: empty history");
  return mean(history);
}

double binary_cross_entropy(double prediction, int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1, got " + std::to_string(label));
  const double p = std::clamp(prediction, kPredictionClamp, 1.0 - kPredictionClamp);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

BaseNetwork::BaseNetwork(std::string prefix, NetworkShape shape) : prefix_(std::move(prefix)), shape_(std::move(shape)) {
  if (shape_.dim == 0) throw std::invalid_argument("network dimension must be positive");
  if (shape_.attention_hidden == 0) shape_.attention_hidden = shape_.dim;
  attention_ = {{prefix_ + "attention.0.weight", prefix_ + "attention.0.bias", Activation::relu},
                {prefix_ + "attention.1.weight", prefix_ + "attention.1.bias", Activation::none}};
  for (std::size_t i = 0; i < shape_.cf_hidden.size(); ++i) {
    const std::string base = prefix_ + "cf." + std::to_string(i);
    cf_.push_back({base + ".weight", base + ".bias", Activation::relu});
  }
  const std::string out = prefix_ + "cf." + std::to_string(shape_.cf_hidden.size());
  cf_.push_back({out + ".weight", out + ".bias", Activation::none});
}

void BaseNetwork::add_parameters(ParameterSet& params, Rng& rng) const {
  const std::size_t att_widths[] = {2 * shape_.dim, shape_.attention_hidden, 1};
  add_dense_layers(params, attention_, att_widths, rng);
  std::vector<std::size_t> cf_widths{2 * shape_.dim};
  cf_widths.insert(cf_widths.end(), shape_.cf_hidden.begin(), shape_.cf_hidden.end());
  cf_widths.push_back(1);
  add_dense_layers(params, cf_, cf_widths, rng);
}

std::vector<std::string> BaseNetwork::parameter_names() const {
  std::vector<std::string> names;
  for (const auto* stack : {&attention_, &cf_}) {
    for (const auto& l : *stack) {
      names.push_back(l.weight);
      if (!l.bias.empty()) names.push_back(l.bias);
    }
  }
  return names;
}

Vec BaseNetwork::attention_weights(const ParameterSet& params, std::span<const Vec> history,
                                   ConstSpan candidate) const {
  if (history.empty()) throw std::invalid_argument("attention_weights: empty history");
  Vec logits(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) {
    logits[i] = mlp_forward(params, attention_, concat(history[i], candidate))[0];
  }
  return softmax(logits);
}

Vec BaseNetwork::user_encode(const ParameterSet& params, std::span<const Vec> history, ConstSpan candidate) const {
  if (history.empty()) throw std::invalid_argument("user_encode: empty history");
  return weighted_sum(history, attention_weights(params, history, candidate));
}

double BaseNetwork::predict(const ParameterSet& params, ConstSpan user, ConstSpan news) const {
  if (user.size() != shape_.dim || news.size() != shape_.dim) {
    throw ShapeError("predict: expected two [" + std::to_string(shape_.dim) + "] vectors, got [" +
                     std::to_string(user.size()) + "] and [" + std::to_string(news.size()) + "]");
  }
  return sigmoid(mlp_forward(params, cf_, concat(user, news))[0]);
}

double BaseNetwork::score(const ParameterSet& params, std::span<const NewsArticle> articles,
                          std::span<const ArticleId> history, ArticleId candidate) const {
  std::vector<Vec> reps;
  reps.reserve(history.size());
  for (ArticleId a : history) reps.push_back(news_encode(params, articles[a].tokens));
  const Vec cand = news_encode(params, articles[candidate].tokens);
  return predict(params, user_encode(params, reps, cand), cand);
}

namespace {

/// W x over the column block [offset, offset + x.size()) of W.
Vec block_matvec(const Tensor& w, std::size_t offset, ConstSpan x) {
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  Vec y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w.data() + r * cols + offset;
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += wr[c] * x[c];
    y[r] = s;
  }
  return y;
}

/// dW[:, block] += dy x^T and dx += W[:, block]^T dy.
void block_backward(const Tensor& w, std::size_t offset, ConstSpan x, ConstSpan dy, Tensor* dw,
                    std::span<double> dx) {
  const std::size_t cols = w.cols();
  for (std::size_t r = 0; r < dy.size(); ++r) {
    const double d = dy[r];
    if (d == 0.0) continue;
    const double* wr = w.data() + r * cols + offset;
    if (dw) {
      double* gr = dw->data() + r * cols + offset;
      for (std::size_t c = 0; c < x.size(); ++c) gr[c] += d * x[c];
    }
    for (std::size_t c = 0; c < x.size(); ++c) dx[c] += d * wr[c];
  }
}

Tensor* find_grad(ParameterSet* grads, const std::string& name) {
  return grads && grads->contains(name) ? &grads->get(name) : nullptr;
}

}  // namespace

double BaseNetwork::batch_loss(const ParameterSet& params, std::span<const NewsArticle> articles,
                               std::span<const TrainingExample> batch, ParameterSet* grads,
                               double grad_scale) const {
  const std::size_t dim = shape_.dim;
  const std::size_t hidden = shape_.attention_hidden;

  // Encode every distinct article once; gradients w.r.t. these representations
  // are accumulated per article and scattered to the embedding at the end.
  std::unordered_map<ArticleId, std::size_t> slot;
  std::vector<ArticleId> order;
  auto intern = [&](ArticleId a) {
    auto [it, inserted] = slot.try_emplace(a, order.size());
    if (inserted) order.push_back(a);
    return it->second;
  };
  for (const auto& ex : batch) {
    if (ex.label != 0 && ex.label != 1) {
      throw std::invalid_argument("label must be 0 or 1, got " + std::to_string(ex.label));
    }
    if (ex.history.empty()) throw std::invalid_argument("training example with empty history");
    for (ArticleId a : ex.history) intern(a);
    intern(ex.candidate);
  }
  std::vector<Vec> reps(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) reps[i] = news_encode(params, articles[order[i]].tokens);

  // The attention unit's first layer splits into a history block and a
  // candidate block, each applied once per distinct article.
  const Tensor& w1 = params.get(attention_[0].weight);
  const Tensor& b1 = params.get(attention_[0].bias);
  const Tensor& w2 = params.get(attention_[1].weight);
  const double b2 = params.get(attention_[1].bias)[0];
  std::vector<Vec> proj_hist(order.size());
  std::vector<Vec> proj_cand(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    proj_hist[i] = block_matvec(w1, 0, reps[i]);
    proj_cand[i] = block_matvec(w1, dim, reps[i]);
    for (std::size_t r = 0; r < hidden; ++r) proj_cand[i][r] += b1[r];
  }

  std::vector<Vec> d_reps;
  std::vector<Vec> d_proj_hist;
  std::vector<Vec> d_proj_cand;
  Tensor* g_b1 = nullptr;
  Tensor* g_w2 = nullptr;
  Tensor* g_b2 = nullptr;
  if (grads) {
    d_reps.assign(order.size(), Vec(dim, 0.0));
    d_proj_hist.assign(order.size(), Vec(hidden, 0.0));
    d_proj_cand.assign(order.size(), Vec(hidden, 0.0));
    g_b1 = find_grad(grads, attention_[0].bias);
    g_w2 = find_grad(grads, attention_[1].weight);
    g_b2 = find_grad(grads, attention_[1].bias);
  }

  double total = 0.0;
  std::vector<Vec> act;
  std::vector<std::size_t> hist_slot;
  for (const auto& ex : batch) {
    const std::size_t n = ex.history.size();
    const std::size_t cand_slot = slot.at(ex.candidate);
    const Vec& cand = reps[cand_slot];

    act.resize(n);
    hist_slot.resize(n);
    Vec logits(n);
    for (std::size_t i = 0; i < n; ++i) {
      hist_slot[i] = slot.at(ex.history[i]);
      const Vec& ph = proj_hist[hist_slot[i]];
      const Vec& pc = proj_cand[cand_slot];
      act[i].resize(hidden);
      double z = b2;
      for (std::size_t r = 0; r < hidden; ++r) {
        act[i][r] = relu(ph[r] + pc[r]);
        z += w2[r] * act[i][r];
      }
      logits[i] = z;
    }
    const Vec alpha = softmax(logits);
    Vec user(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec& h = reps[hist_slot[i]];
      for (std::size_t k = 0; k < dim; ++k) user[k] += alpha[i] * h[k];
    }

    MlpTrace cf_trace;
    const double logit = mlp_forward(params, cf_, concat(user, cand), grads ? &cf_trace : nullptr)[0];
    const double pred = sigmoid(logit);
    total += binary_cross_entropy(pred, ex.label);
    if (!grads) continue;

    // d/dlogit of the cross-entropy is pred - label; zero where the clamp is active.
    if (pred < kPredictionClamp || pred > 1.0 - kPredictionClamp) continue;
    const double dlogit = grad_scale * (pred - static_cast<double>(ex.label));
    const double dout[] = {dlogit};
    Vec d_cf_in(2 * dim, 0.0);
    mlp_backward(params, cf_, cf_trace, dout, grads, d_cf_in);

    Vec& d_cand = d_reps[cand_slot];
    for (std::size_t k = 0; k < dim; ++k) d_cand[k] += d_cf_in[dim + k];

    Vec d_alpha(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec& h = reps[hist_slot[i]];
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += d_cf_in[k] * h[k];
      d_alpha[i] = s;
      Vec& dh = d_reps[hist_slot[i]];
      for (std::size_t k = 0; k < dim; ++k) dh[k] += alpha[i] * d_cf_in[k];
    }
    const Vec d_logits = softmax_backward(alpha, d_alpha);
    Vec& dpc = d_proj_cand[cand_slot];
    for (std::size_t i = 0; i < n; ++i) {
      const double d = d_logits[i];
      if (g_b2) (*g_b2)[0] += d;
      Vec& dph = d_proj_hist[hist_slot[i]];
      for (std::size_t r = 0; r < hidden; ++r) {
        if (g_w2) (*g_w2)[r] += d * act[i][r];
        if (act[i][r] <= 0.0) continue;
        const double dz = d * w2[r];
        dph[r] += dz;
        dpc[r] += dz;
        if (g_b1) (*g_b1)[r] += dz;
      }
    }
  }

  if (grads) {
    Tensor* g_w1 = find_grad(grads, attention_[0].weight);
    for (std::size_t i = 0; i < order.size(); ++i) {
      block_backward(w1, 0, reps[i], d_proj_hist[i], g_w1, d_reps[i]);
      block_backward(w1, dim, reps[i], d_proj_cand[i], g_w1, d_reps[i]);
      news_encode_backward(articles[order[i]].tokens, d_reps[i], *grads);
    }
  }
  return total;
}

double BaseNetwork::relu_margin(const ParameterSet& params, std::span<const NewsArticle> articles,
                                std::span<const TrainingExample> batch) const {
  double margin = std::numeric_limits<double>::infinity();
  auto scan = [&](std::span<const DenseLayer> layers, ConstSpan input) {
    Vec x(input.begin(), input.end());
    for (const auto& layer : layers) {
      Vec z = affine(params.get(layer.weight), params.get(layer.bias), x);
      if (layer.activation == Activation::relu) {
        for (double& v : z) {
          margin = std::min(margin, std::abs(v));
          v = relu(v);
        }
      }
      x = std::move(z);
    }
  };
  for (const auto& ex : batch) {
    std::vector<Vec> hist;
    for (ArticleId a : ex.history) hist.push_back(news_encode(params, articles[a].tokens));
    const Vec cand = news_encode(params, articles[ex.candidate].tokens);
    for (const auto& h : hist) scan(attention_, concat(h, cand));
    scan(cf_, concat(user_encode(params, hist, cand), cand));
  }
  return margin;
}

double joint_loss(const ParameterSet& params, std::span<const NewsArticle> articles, const BaseNetwork& target,
                  std::span<const TrainingExample> target_batch, const BaseNetwork& source,
                  std::span<const TrainingExample> source_batch, ParameterSet* grads, double grad_scale) {
  return target.batch_loss(params, articles, target_batch, grads, grad_scale) +
         source.batch_loss(params, articles, source_batch, grads, grad_scale);
}

}  // namespace trnews
