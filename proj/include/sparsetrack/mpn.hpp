#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsetrack/graph.hpp"
#include "sparsetrack/nn.hpp"

namespace sparsetrack {

enum class Aggregation { Mean, Sum };

std::string to_string(Aggregation agg);
Aggregation parse_aggregation(const std::string& text);

struct MpnDims {
  int feature_dim = 32;  // appearance feature size d
  int node_dim = 32;
  int edge_dim = 32;
  int hidden_dim = 32;  // hidden width of the encoder / update MLPs
  int classifier_hidden = 16;
  int layers = 4;  // propagation rounds L
  Aggregation aggregation = Aggregation::Mean;

  bool operator==(const MpnDims&) const = default;
};

// Encoders, the shared update functions and the edge classifier.
// `node_update` serves both the trajectory and the detection side.
struct MpnModel {
  MpnDims dims;
  nn::Mlp node_encoder;  // d -> node_dim
  nn::Mlp edge_encoder;  // 6 -> edge_dim
  nn::Mlp edge_update;   // [T | D | h] -> edge_dim
  nn::Mlp node_update;   // [node | h] -> node_dim
  nn::Mlp classifier;    // h -> 1 logit
  nn::LstmParams lstm;   // d -> d, only read by LSTM feature integration

  static MpnModel init(const MpnDims& dims, std::uint64_t seed);
  // Same layout, all parameters zero (gradient accumulator).
  MpnModel zeros_like() const;
  nn::ParamList parameters();
};

// Node and edge embeddings for layers 0..L (rows follow the graph's node/edge order).
struct MpnState {
  std::vector<Mat> tracks;
  std::vector<Mat> detections;
  std::vector<Mat> edges;
  int layers() const { return static_cast<int>(edges.size()) - 1; }
};

// Activations retained for the backward pass.
struct MpnTrace {
  nn::Mlp::Cache track_encoder, det_encoder, edge_encoder;
  std::vector<nn::Mlp::Cache> edge_update, track_update, det_update;  // one per round
  nn::Mlp::Cache classifier;
  MpnState state;
};

// Layer-0 embeddings. `track_features` overrides the graph's trajectory features
// (rows = tracks) when non-null.
MpnState encode(const AssocGraph& graph, const MpnModel& model, MpnTrace* trace = nullptr,
                const Mat* track_features = nullptr);

// Runs `rounds` message passing rounds on top of the last layer of `state`.
MpnState propagate(MpnState state, const AssocGraph& graph, const MpnModel& model, int rounds,
                   MpnTrace* trace = nullptr);
inline MpnState propagate(MpnState state, const AssocGraph& graph, const MpnModel& model) {
  return propagate(std::move(state), graph, model, model.dims.layers);
}

Vec edge_logits(const MpnState& state, const MpnModel& model, MpnTrace* trace = nullptr);

// Per-edge probability that trajectory and detection share an identity.
Vec classify_edges(const MpnState& state, const MpnModel& model);

// encode -> propagate -> classify, returning logits; fills `trace` when given.
Vec mpn_forward(const AssocGraph& graph, const MpnModel& model, MpnTrace* trace = nullptr,
                const Mat* track_features = nullptr);

// Edge probabilities for inference.
Vec score_edges(const AssocGraph& graph, const MpnModel& model);

// Backpropagates d loss / d logit through a traced forward pass. Parameter
// gradients are accumulated into `grads`; if `track_feature_grad` is given it
// receives d loss / d trajectory input feature (rows = tracks).
void mpn_backward(const AssocGraph& graph, const MpnModel& model, const MpnTrace& trace,
                  const Vec& logit_grad, MpnModel& grads, Mat* track_feature_grad = nullptr);

// Feature matrix of the graph's trajectory nodes (rows = tracks).
Mat track_feature_matrix(const AssocGraph& graph);

}  // namespace sparsetrack
