#pragma once

#include <cstdint>
#include <vector>

#include "fop/dataset.hpp"
#include "fop/mat.hpp"

namespace fop {

enum class Activation { Tanh, Relu, SoftmaxOutput };

struct MlpLayer {
  Mat w;  // in x out
  Vec b;  // out
  Activation act;
};

struct MlpModel {
  std::vector<MlpLayer> layers;
  std::uint64_t seed = 0;
};

// dims = {in, hidden..., classes}; weights uniform +-sqrt(6/(in+out)), biases
// zero, hidden_act on every layer except the SoftmaxOutput head.
MlpModel make_mlp(const std::vector<std::size_t>& dims, Activation hidden_act,
                  std::uint64_t seed);

struct ForwardCache {
  Mat input;
  std::vector<Mat> pre;   // pre-activation per layer
  std::vector<Mat> post;  // activations; last entry is softmax probabilities
};

// Returns logits (pre-softmax). cache may be null when only logits are needed.
Mat forward(const MlpModel& m, const Mat& x, ForwardCache* cache);

// Mean cross-entropy of softmax probabilities against integer labels.
double cross_entropy(const Mat& probs, const std::vector<int>& labels);

// Gradients of mean cross-entropy, flattened as [W0, b0, W1, b1, ...] with
// biases as 1 x out rows; same order as model_params.
std::vector<Mat> backward(const MlpModel& m, const ForwardCache& cache,
                          const std::vector<int>& labels);

std::vector<Mat> model_params(const MlpModel& m);
void set_model_params(MlpModel& m, const std::vector<Mat>& params);

// True for weight matrices, false for biases: only matrix-shaped parameters
// carry a preconditioner, applied over the input dimension.
std::vector<bool> precondition_mask(const MlpModel& m);

double accuracy(const MlpModel& m, const Dataset& data);

}  // namespace fop
