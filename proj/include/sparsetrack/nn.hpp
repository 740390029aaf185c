#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sparsetrack/types.hpp"

namespace sparsetrack::nn {

enum class Activation { Identity, Relu };

// A named, shaped window onto contiguous parameter storage. Optimizers,
// checkpoints and the gradient checker all operate on lists of these.
struct ParamView {
  std::string name;
  std::span<Scalar> values;
  std::vector<int> shape;
};

using ParamList = std::vector<ParamView>;

struct DenseLayer {
  Mat weight;  // out x in
  Vec bias;    // out
};

class Mlp {
 public:
  // Per-call activations retained for the backward pass.
  struct Cache {
    const Mlp* owner = nullptr;
    std::vector<Mat> inputs;       // input to each layer
    std::vector<Mat> activations;  // pre-activation of each layer
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> sizes, Activation hidden = Activation::Relu,
               Activation output = Activation::Identity);

  // Glorot-uniform weights, zero biases.
  static Mlp glorot(std::vector<int> sizes, std::mt19937_64& rng,
                    Activation hidden = Activation::Relu, Activation output = Activation::Identity);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  // Rows of `input` are independent samples.
  Mat forward(const Mat& input, Cache* cache = nullptr) const;

  // Accumulates parameter gradients into `grads` and returns d loss / d input.
  Mat backward(const Cache& cache, const Mat& output_grad, Mlp& grads) const;

  Mlp zeros_like() const;
  void append_params(const std::string& prefix, ParamList& out);

 private:
  std::vector<int> sizes_;
  Activation hidden_ = Activation::Relu;
  Activation output_ = Activation::Identity;
  std::vector<DenseLayer> layers_;
};

struct LstmParams {
  // Gate blocks are stacked in the order input, forget, candidate, output.
  Mat input_weight;   // 4H x D
  Mat hidden_weight;  // 4H x H
  Vec bias;           // 4H

  LstmParams() = default;
  LstmParams(int input_dim, int hidden_dim);
  static LstmParams glorot(int input_dim, int hidden_dim, std::mt19937_64& rng);

  int input_dim() const { return static_cast<int>(input_weight.cols()); }
  int hidden_dim() const { return static_cast<int>(hidden_weight.cols()); }
  LstmParams zeros_like() const { return LstmParams(input_dim(), hidden_dim()); }
  void append_params(const std::string& prefix, ParamList& out);
};

struct LstmState {
  Vec h;
  Vec c;
  static LstmState zeros(int hidden_dim) {
    return {Vec::Zero(hidden_dim), Vec::Zero(hidden_dim)};
  }
};

struct LstmCache {
  Vec x, h_prev, c_prev;
  Vec i, f, g, o;
  Vec c, tanh_c;
};

struct LstmStepGrad {
  Vec input;
  Vec h_prev;
  Vec c_prev;
};

// One cell update. The returned state's `h` is the cell output.
LstmState lstm_step(const LstmParams& params, const LstmState& state, const Vec& input,
                    LstmCache* cache = nullptr);

// Backward through one cell given gradients on the new h and c.
LstmStepGrad lstm_step_backward(const LstmParams& params, const LstmCache& cache, const Vec& h_grad,
                                const Vec& c_grad, LstmParams& grads);

inline constexpr double kProbabilityClip = 1e-7;

// -(w*y*log p + (1-y)*log(1-p)) with p clipped to [clip, 1-clip].
double weighted_bce(double p, int label, double positive_weight);
// d loss / d p; zero inside the clipped region.
double weighted_bce_grad(double p, int label, double positive_weight);

struct LogitLoss {
  double loss = 0.0;
  double logit_grad = 0.0;
  double probability = 0.0;
};

// Weighted BCE on sigmoid(logit), with the gradient taken w.r.t. the logit.
LogitLoss weighted_bce_logit(double logit, int label, double positive_weight);

double sigmoid(double x);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Vec> first_moment;
  std::vector<Vec> second_moment;
};

// Bias-corrected Adam step. Moments are created lazily to match `params`.
// Throws std::runtime_error on any non-finite gradient, leaving params untouched.
void adam_update(const ParamList& params, const ParamList& grads, AdamState& state, double lr);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  // (parameter name, flat index) of every coordinate above tolerance.
  std::vector<std::pair<std::string, std::size_t>> flagged;
  bool passed() const { return flagged.empty(); }
};

// Compares analytic gradients with central differences, coordinate by coordinate.
// `loss` must read the parameters through the storage that `params` views.
// Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport grad_check(const std::function<double()>& loss, const ParamList& params,
                           const ParamList& analytic, double tolerance, double step = 1e-5);

void zero(const ParamList& params);

}  // namespace sparsetrack::nn
