#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "camsel/tensor.hpp"

namespace camsel {

/// One backbone block: k x k convolution ("same" padding, given stride),
/// ReLU, then non-overlapping max pooling of size `pool` (1 disables it).
struct ConvBlockSpec {
  int channels = 8;
  int kernel = 3;
  int stride = 1;
  int pool = 2;

  bool operator==(const ConvBlockSpec&) const = default;
};

/// Grayscale input -> conv blocks -> global average pool -> ReLU hidden
/// layers -> 2-way softmax.
struct ModelSpec {
  static constexpr int kOutputs = 2;

  int input_height = 120;
  int input_width = 160;
  std::vector<ConvBlockSpec> backbone{{8, 3, 1, 2}, {16, 3, 1, 2}, {32, 3, 1, 2}, {64, 3, 1, 2}};
  std::vector<int> head{512, 512};

  void validate() const;
  /// Spatial size (height, width) and channels after block `i`.
  struct Dims {
    int channels, height, width;
  };
  std::vector<Dims> block_dims() const;

  bool operator==(const ModelSpec&) const = default;

  /// Two small conv blocks and a narrow head, for gradient checks.
  static ModelSpec toy();
};

inline constexpr const char* kModelVersion = "camsel-cnn-1";

template <typename Scalar>
struct Layer {
  std::string name;
  Tensor<Scalar> weight;  // conv: [out, in, k, k]; dense: [out, in]
  Tensor<Scalar> bias;    // [out]
};

/// Learnable state. Layers are conv1..convN, fc1..fcM, out, in that order.
template <typename Scalar>
struct ModelParams {
  ModelSpec spec;
  std::string version = kModelVersion;
  std::vector<Layer<Scalar>> layers;

  /// Zero tensors with this model's layer layout.
  ModelParams zeros_like() const;

  template <typename Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out;
    out.spec = spec;
    out.version = version;
    for (const auto& l : layers) out.layers.push_back({l.name, l.weight.template cast<Other>(), l.bias.template cast<Other>()});
    return out;
  }
};

/// Expected layer names and shapes for a spec.
struct LayerShape {
  std::string name;
  std::vector<int> weight;
  std::vector<int> bias;
};
std::vector<LayerShape> layer_shapes(const ModelSpec& spec);

/// He-style uniform initialisation, U(-sqrt(6/fan_in), sqrt(6/fan_in)),
/// zero biases.
template <typename Scalar>
ModelParams<Scalar> init_params(const ModelSpec& spec, std::uint64_t seed);

/// Logits [N, 2] for a batch [N, 1, H, W].
template <typename Scalar>
Tensor<Scalar> forward_logits(const ModelParams<Scalar>& model, const Tensor<Scalar>& batch);

/// Row-wise softmax of the logits.
template <typename Scalar>
Tensor<Scalar> forward(const ModelParams<Scalar>& model, const Tensor<Scalar>& batch);

template <typename Scalar>
Tensor<Scalar> softmax_rows(const Tensor<Scalar>& logits);

inline constexpr double kLogClamp = 1e-12;

/// Mean negative log-likelihood of the true class, log argument clamped at 1e-12.
template <typename Scalar>
double cross_entropy(const Tensor<Scalar>& probs, std::span<const int> labels);

template <typename Scalar>
struct BackwardResult {
  ModelParams<Scalar> gradients;
  double loss = 0.0;
};

/// Exact gradients of the mean cross-entropy with respect to every parameter.
template <typename Scalar>
BackwardResult<Scalar> backward(const ModelParams<Scalar>& model, const Tensor<Scalar>& batch,
                                std::span<const int> labels);

}  // namespace camsel
