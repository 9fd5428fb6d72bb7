#include "fop/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fop/error.hpp"
#include "fop/rng.hpp"

namespace fop {

MlpModel make_mlp(const std::vector<std::size_t>& dims, Activation hidden_act,
                  std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("make_mlp: need at least input and output dims");
  if (hidden_act == Activation::SoftmaxOutput) {
    throw ConfigError("make_mlp: softmax is reserved for the output layer");
  }
  MlpModel m;
  m.seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    MlpLayer layer;
    const std::size_t in = dims[l], out = dims[l + 1];
    layer.w = Mat(in, out);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& v : layer.w.values()) v = bound * (2.0 * rng.next_unit() - 1.0);
    layer.b.assign(out, 0.0);
    layer.act = (l + 2 == dims.size()) ? Activation::SoftmaxOutput : hidden_act;
    m.layers.push_back(std::move(layer));
  }
  return m;
}

namespace {

Mat affine(const Mat& x, const MlpLayer& layer) {
  Mat pre = matmul(x, layer.w);
  for (std::size_t i = 0; i < pre.rows(); ++i)
    for (std::size_t j = 0; j < pre.cols(); ++j) pre(i, j) += layer.b[j];
  return pre;
}

Mat activate(const Mat& pre, Activation act) {
  Mat out = pre;
  switch (act) {
    case Activation::Tanh:
      for (double& v : out.values()) v = std::tanh(v);
      return out;
    case Activation::Relu:
      for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
      return out;
    case Activation::SoftmaxOutput:
      for (std::size_t i = 0; i < out.rows(); ++i) {
        double mx = out(i, 0);
        for (std::size_t j = 1; j < out.cols(); ++j) mx = std::max(mx, out(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < out.cols(); ++j) {
          out(i, j) = std::exp(out(i, j) - mx);
          z += out(i, j);
        }
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) /= z;
      }
      return out;
  }
  throw ContractViolation("activate: unknown activation");
}

}  // namespace

Mat forward(const MlpModel& m, const Mat& x, ForwardCache* cache) {
  if (m.layers.empty()) throw ContractViolation("forward: empty model");
  if (x.cols() != m.layers.front().w.rows()) {
    throw ContractViolation("forward: input has " + std::to_string(x.cols()) +
                            " features, model expects " +
                            std::to_string(m.layers.front().w.rows()));
  }
  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
  }
  Mat h = x;
  Mat logits;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Mat pre = affine(h, m.layers[l]);
    if (l + 1 == m.layers.size()) logits = pre;
    Mat post = activate(pre, m.layers[l].act);
    if (cache) {
      cache->pre.push_back(pre);
      cache->post.push_back(post);
    }
    h = std::move(post);
  }
  return logits;
}

double cross_entropy(const Mat& probs, const std::vector<int>& labels) {
  if (probs.rows() != labels.size()) {
    throw ContractViolation("cross_entropy: row/label count mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
      throw ContractViolation("cross_entropy: label " + std::to_string(y) +
                              " out of range");
    }
    s -= std::log(std::max(probs(i, static_cast<std::size_t>(y)), 1e-300));
  }
  return s / static_cast<double>(probs.rows());
}

std::vector<Mat> backward(const MlpModel& m, const ForwardCache& cache,
                          const std::vector<int>& labels) {
  const std::size_t layer_count = m.layers.size();
  if (cache.pre.size() != layer_count || cache.post.size() != layer_count) {
    throw ContractViolation("backward: cache does not match model");
  }
  const Mat& probs = cache.post.back();
  const std::size_t n = probs.rows();
  if (labels.size() != n) throw ContractViolation("backward: label count mismatch");

  Mat delta = probs;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
      throw ContractViolation("backward: label " + std::to_string(y) +
                              " out of range");
    }
    delta(i, static_cast<std::size_t>(y)) -= 1.0;
  }
  for (double& v : delta.values()) v *= inv_n;

  std::vector<Mat> grads(2 * layer_count);
  for (std::size_t l = layer_count; l-- > 0;) {
    const Mat& below = l == 0 ? cache.input : cache.post[l - 1];
    grads[2 * l] = matmul_tn(below, delta);
    Mat db(1, delta.cols());
    for (std::size_t i = 0; i < delta.rows(); ++i)
      for (std::size_t j = 0; j < delta.cols(); ++j) db(0, j) += delta(i, j);
    grads[2 * l + 1] = std::move(db);
    if (l == 0) break;
    Mat prev = matmul_nt(delta, m.layers[l].w);
    switch (m.layers[l - 1].act) {
      case Activation::Tanh:
        for (std::size_t i = 0; i < prev.size(); ++i) {
          const double a = cache.post[l - 1].values()[i];
          prev.values()[i] *= 1.0 - a * a;
        }
        break;
      case Activation::Relu:
        for (std::size_t i = 0; i < prev.size(); ++i) {
          if (cache.pre[l - 1].values()[i] <= 0.0) prev.values()[i] = 0.0;
        }
        break;
      case Activation::SoftmaxOutput:
        throw ContractViolation("backward: softmax below the output layer");
    }
    delta = std::move(prev);
  }
  return grads;
}

std::vector<Mat> model_params(const MlpModel& m) {
  std::vector<Mat> params;
  params.reserve(2 * m.layers.size());
  for (const MlpLayer& layer : m.layers) {
    params.push_back(layer.w);
    Mat b(1, layer.b.size());
    for (std::size_t j = 0; j < layer.b.size(); ++j) b(0, j) = layer.b[j];
    params.push_back(std::move(b));
  }
  return params;
}

void set_model_params(MlpModel& m, const std::vector<Mat>& params) {
  if (params.size() != 2 * m.layers.size()) {
    throw ContractViolation("set_model_params: parameter count mismatch");
  }
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const Mat& w = params[2 * l];
    const Mat& b = params[2 * l + 1];
    if (!w.same_shape(m.layers[l].w) || b.rows() != 1 ||
        b.cols() != m.layers[l].b.size()) {
      throw ContractViolation("set_model_params: shape mismatch at layer " +
                              std::to_string(l));
    }
    m.layers[l].w = w;
    for (std::size_t j = 0; j < b.cols(); ++j) m.layers[l].b[j] = b(0, j);
  }
}

std::vector<bool> precondition_mask(const MlpModel& m) {
  std::vector<bool> mask(2 * m.layers.size());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    mask[2 * l] = true;
    mask[2 * l + 1] = false;
  }
  return mask;
}

double accuracy(const MlpModel& m, const Dataset& data) {
  Mat logits = forward(m, data.inputs, nullptr);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    if (static_cast<int>(best) == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

}  // namespace fop
