#include "sparsetrack/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparsetrack::nn {

namespace {

ParamView view_of(std::string name, Mat& m) {
  return {std::move(name), std::span<Scalar>(m.data(), static_cast<std::size_t>(m.size())),
          {static_cast<int>(m.rows()), static_cast<int>(m.cols())}};
}

ParamView view_of(std::string name, Vec& v) {
  return {std::move(name), std::span<Scalar>(v.data(), static_cast<std::size_t>(v.size())),
          {static_cast<int>(v.size())}};
}

void fill_glorot(Mat& m, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<Scalar>(dist(rng));
}

Vec sigmoid_vec(const Vec& x) {
  return x.unaryExpr([](Scalar v) { return static_cast<Scalar>(sigmoid(v)); });
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(std::vector<int> sizes, Activation hidden, Activation output)
    : sizes_(std::move(sizes)), hidden_(hidden), output_(output) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
  for (int s : sizes_) {
    if (s <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    layers_.push_back({Mat::Zero(sizes_[l + 1], sizes_[l]), Vec::Zero(sizes_[l + 1])});
  }
}

Mlp Mlp::glorot(std::vector<int> sizes, std::mt19937_64& rng, Activation hidden,
                Activation output) {
  Mlp m(std::move(sizes), hidden, output);
  for (auto& layer : m.layers_) fill_glorot(layer.weight, rng);
  return m;
}

Mat Mlp::forward(const Mat& input, Cache* cache) const {
  if (input.cols() != input_dim()) {
    throw std::invalid_argument("Mlp input has " + std::to_string(input.cols()) +
                                " columns, expected " + std::to_string(input_dim()));
  }
  if (cache) {
    cache->owner = this;
    cache->inputs.clear();
    cache->activations.clear();
  }
  Mat x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    Mat z = x * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->activations.push_back(z);
    }
    const Activation act = (l + 1 == layers_.size()) ? output_ : hidden_;
    if (act == Activation::Relu) z = z.cwiseMax(Scalar(0));
    x = std::move(z);
  }
  return x;
}

Mat Mlp::backward(const Cache& cache, const Mat& output_grad, Mlp& grads) const {
  if (cache.owner != this || cache.inputs.size() != layers_.size()) {
    throw std::logic_error("Mlp::backward called with a cache from a different forward pass");
  }
  if (output_grad.rows() != cache.inputs.front().rows() || output_grad.cols() != output_dim()) {
    throw std::invalid_argument("Mlp::backward output gradient shape does not match the cache");
  }
  if (grads.layers_.size() != layers_.size()) {
    throw std::invalid_argument("Mlp::backward gradient accumulator has the wrong layout");
  }
  Mat g = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Activation act = (l + 1 == layers_.size()) ? output_ : hidden_;
    if (act == Activation::Relu) {
      g = (cache.activations[l].array() > Scalar(0)).select(g, Scalar(0));
    }
    grads.layers_[l].weight.noalias() += g.transpose() * cache.inputs[l];
    grads.layers_[l].bias += g.colwise().sum().transpose();
    Mat prev = g * layers_[l].weight;
    g = std::move(prev);
  }
  return g;
}

Mlp Mlp::zeros_like() const { return Mlp(sizes_, hidden_, output_); }

void Mlp::append_params(const std::string& prefix, ParamList& out) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    out.push_back(view_of(prefix + ".layer" + std::to_string(l) + ".weight", layers_[l].weight));
    out.push_back(view_of(prefix + ".layer" + std::to_string(l) + ".bias", layers_[l].bias));
  }
}

// ---------------------------------------------------------------------------
// LSTM

LstmParams::LstmParams(int input_dim, int hidden_dim)
    : input_weight(Mat::Zero(4 * hidden_dim, input_dim)),
      hidden_weight(Mat::Zero(4 * hidden_dim, hidden_dim)),
      bias(Vec::Zero(4 * hidden_dim)) {
  if (input_dim <= 0 || hidden_dim <= 0) throw std::invalid_argument("LSTM sizes must be positive");
}

LstmParams LstmParams::glorot(int input_dim, int hidden_dim, std::mt19937_64& rng) {
  LstmParams p(input_dim, hidden_dim);
  fill_glorot(p.input_weight, rng);
  fill_glorot(p.hidden_weight, rng);
  return p;
}

void LstmParams::append_params(const std::string& prefix, ParamList& out) {
  out.push_back(view_of(prefix + ".input_weight", input_weight));
  out.push_back(view_of(prefix + ".hidden_weight", hidden_weight));
  out.push_back(view_of(prefix + ".bias", bias));
}

LstmState lstm_step(const LstmParams& params, const LstmState& state, const Vec& input,
                    LstmCache* cache) {
  const int H = params.hidden_dim();
  if (input.size() != params.input_dim()) throw std::invalid_argument("LSTM input size mismatch");
  if (state.h.size() != H || state.c.size() != H) {
    throw std::invalid_argument("LSTM state size mismatch");
  }
  const Vec pre = params.input_weight * input + params.hidden_weight * state.h + params.bias;
  const Vec i = sigmoid_vec(pre.segment(0, H));
  const Vec f = sigmoid_vec(pre.segment(H, H));
  const Vec g = pre.segment(2 * H, H).array().tanh().matrix();
  const Vec o = sigmoid_vec(pre.segment(3 * H, H));
  const Vec c = f.cwiseProduct(state.c) + i.cwiseProduct(g);
  const Vec tanh_c = c.array().tanh().matrix();
  LstmState next{o.cwiseProduct(tanh_c), c};
  if (cache) {
    *cache = {input, state.h, state.c, i, f, g, o, c, tanh_c};
  }
  return next;
}

LstmStepGrad lstm_step_backward(const LstmParams& params, const LstmCache& cache, const Vec& h_grad,
                                const Vec& c_grad, LstmParams& grads) {
  const int H = params.hidden_dim();
  if (cache.c.size() != H || h_grad.size() != H || c_grad.size() != H) {
    throw std::invalid_argument("LSTM backward shape mismatch");
  }
  const Vec d_o = h_grad.cwiseProduct(cache.tanh_c);
  const Vec d_c =
      c_grad + h_grad.cwiseProduct(cache.o).cwiseProduct(
                   (Vec::Ones(H).array() - cache.tanh_c.array().square()).matrix());
  const Vec d_i = d_c.cwiseProduct(cache.g);
  const Vec d_g = d_c.cwiseProduct(cache.i);
  const Vec d_f = d_c.cwiseProduct(cache.c_prev);

  Vec d_pre(4 * H);
  d_pre.segment(0, H) = d_i.array() * cache.i.array() * (1 - cache.i.array());
  d_pre.segment(H, H) = d_f.array() * cache.f.array() * (1 - cache.f.array());
  d_pre.segment(2 * H, H) = d_g.array() * (1 - cache.g.array().square());
  d_pre.segment(3 * H, H) = d_o.array() * cache.o.array() * (1 - cache.o.array());

  grads.input_weight.noalias() += d_pre * cache.x.transpose();
  grads.hidden_weight.noalias() += d_pre * cache.h_prev.transpose();
  grads.bias += d_pre;

  return {params.input_weight.transpose() * d_pre, params.hidden_weight.transpose() * d_pre,
          d_c.cwiseProduct(cache.f)};
}

// ---------------------------------------------------------------------------
// Loss

namespace {
void require_label(int label, double positive_weight) {
  if (label != 0 && label != 1) throw std::invalid_argument("BCE label must be 0 or 1");
  if (!(positive_weight > 0.0)) throw std::invalid_argument("BCE positive weight must be > 0");
}
}  // namespace

double weighted_bce(double p, int label, double positive_weight) {
  require_label(label, positive_weight);
  const double q = std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
  return label == 1 ? -positive_weight * std::log(q) : -std::log(1.0 - q);
}

double weighted_bce_grad(double p, int label, double positive_weight) {
  require_label(label, positive_weight);
  if (p < kProbabilityClip || p > 1.0 - kProbabilityClip) return 0.0;
  return label == 1 ? -positive_weight / p : 1.0 / (1.0 - p);
}

LogitLoss weighted_bce_logit(double logit, int label, double positive_weight) {
  const double p = sigmoid(logit);
  LogitLoss out;
  out.probability = p;
  out.loss = weighted_bce(p, label, positive_weight);
  if (p < kProbabilityClip || p > 1.0 - kProbabilityClip) {
    out.logit_grad = 0.0;
  } else {
    // dl/dp * p(1-p), simplified.
    out.logit_grad = label == 1 ? -positive_weight * (1.0 - p) : p;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adam

void adam_update(const ParamList& params, const ParamList& grads, AdamState& state, double lr) {
  if (params.size() != grads.size()) throw std::invalid_argument("Adam: params/grads mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].values.size() != grads[k].values.size()) {
      throw std::invalid_argument("Adam: shape mismatch for " + params[k].name);
    }
    for (Scalar g : grads[k].values) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw std::runtime_error("Adam: non-finite gradient in " + grads[k].name);
      }
    }
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.push_back(Vec::Zero(static_cast<Eigen::Index>(p.values.size())));
      state.second_moment.push_back(Vec::Zero(static_cast<Eigen::Index>(p.values.size())));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("Adam: state was created for a different parameter list");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t n = 0; n < params[k].values.size(); ++n) {
      const double g = grads[k].values[n];
      const auto idx = static_cast<Eigen::Index>(n);
      m[idx] = static_cast<Scalar>(state.beta1 * m[idx] + (1.0 - state.beta1) * g);
      v[idx] = static_cast<Scalar>(state.beta2 * v[idx] + (1.0 - state.beta2) * g * g);
      const double m_hat = m[idx] / bc1;
      const double v_hat = v[idx] / bc2;
      params[k].values[n] -= static_cast<Scalar>(lr * m_hat / (std::sqrt(v_hat) + state.epsilon));
    }
  }
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckReport grad_check(const std::function<double()>& loss, const ParamList& params,
                           const ParamList& analytic, double tolerance, double step) {
  if (params.size() != analytic.size()) {
    throw std::invalid_argument("grad_check: params/analytic mismatch");
  }
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t n = 0; n < params[k].values.size(); ++n) {
      Scalar& x = params[k].values[n];
      const Scalar saved = x;
      x = static_cast<Scalar>(saved + step);
      const double up = loss();
      x = static_cast<Scalar>(saved - step);
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k].values[n];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_param = params[k].name;
        report.worst_index = n;
      }
      if (rel > tolerance) report.flagged.emplace_back(params[k].name, n);
    }
  }
  return report;
}

void zero(const ParamList& params) {
  for (const auto& p : params) std::fill(p.values.begin(), p.values.end(), Scalar(0));
}

}  // namespace sparsetrack::nn
