#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lecam/mat.hpp"
#include "lecam/rng.hpp"

namespace lecam {

enum class Activation { ReLU, LeakyReLU, Tanh };  // LeakyReLU slope is 0.2

Activation activation_from_string(const std::string& name);
const char* to_string(Activation a);

class MlpNet;

/// Per-layer forward cache for one batch. Consumed by exactly one backward
/// pass; reuse or use against a modified net is a logic error.
struct GradTape {
  std::vector<Mat> layer_inputs;   // input to each affine layer
  std::vector<Mat> pre_activations;
  std::uint64_t net_revision = 0;
  bool consumed = false;
};

struct NetGrads {
  std::vector<Mat> weights;
  std::vector<std::vector<double>> biases;
};

/// Fully-connected network with hidden activations and a linear output
/// layer. Weights are stored [out x in], inputs are row batches [n x in].
class MlpNet {
 public:
  /// He-style uniform init scaled by fan-in; biases zero.
  MlpNet(const std::vector<std::size_t>& widths, Activation hidden_activation,
         Rng& rng);

  /// All-zero parameters (useful as a fixture).
  static MlpNet zeros(const std::vector<std::size_t>& widths,
                      Activation hidden_activation);

  std::size_t num_layers() const { return weights_.size(); }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t output_dim() const { return widths_.back(); }
  const std::vector<std::size_t>& widths() const { return widths_; }
  Activation hidden_activation() const { return activation_; }

  std::vector<Mat>& weights() { return weights_; }
  const std::vector<Mat>& weights() const { return weights_; }
  std::vector<std::vector<double>>& biases() { return biases_; }
  const std::vector<std::vector<double>>& biases() const { return biases_; }

  std::size_t parameter_count() const;

  /// Incremented on every parameter update; invalidates outstanding tapes.
  std::uint64_t revision() const { return revision_; }
  void bump_revision() { ++revision_; }

  Mat forward(const Mat& batch, GradTape* tape = nullptr) const;

  void save(const std::string& path) const;
  static MlpNet load(const std::string& path);

 private:
  MlpNet() = default;
  void validate_widths() const;

  std::vector<std::size_t> widths_;
  Activation activation_ = Activation::ReLU;
  std::vector<Mat> weights_;                // [out x in] per layer
  std::vector<std::vector<double>> biases_; // [out] per layer
  std::uint64_t revision_ = 0;
};

/// Reverse-mode gradients of sum(outputs * output_grads) with respect to all
/// parameters; input gradients are written to *input_grads when non-null.
/// The tape is consumed.
NetGrads backward(const MlpNet& net, GradTape& tape, const Mat& output_grads,
                  Mat* input_grads = nullptr);

/// Bias-corrected Adam. Moment buffers are shaped like the net parameters.
struct AdamState {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Mat> m_weights, v_weights;
  std::vector<std::vector<double>> m_biases, v_biases;

  explicit AdamState(const MlpNet& net, double learning_rate = 2e-4);
};

/// Applies one Adam step. Returns false (and leaves params and moments
/// untouched) when any gradient entry is non-finite.
bool adam_step(AdamState& state, MlpNet& net, const NetGrads& grads);

}  // namespace lecam
