#include "sparsetrack/mpn.hpp"

#include <random>
#include <stdexcept>

namespace sparsetrack {

std::string to_string(Aggregation agg) { return agg == Aggregation::Mean ? "mean" : "sum"; }

Aggregation parse_aggregation(const std::string& text) {
  if (text == "mean") return Aggregation::Mean;
  if (text == "sum") return Aggregation::Sum;
  throw std::invalid_argument("unknown aggregation '" + text + "' (mean|sum)");
}

MpnModel MpnModel::init(const MpnDims& dims, std::uint64_t seed) {
  if (dims.layers < 0) throw std::invalid_argument("MPN layer count must be >= 0");
  std::mt19937_64 rng(seed);
  MpnModel m;
  m.dims = dims;
  const int dn = dims.node_dim;
  const int de = dims.edge_dim;
  const int hid = dims.hidden_dim;
  m.node_encoder = nn::Mlp::glorot({dims.feature_dim, hid, dn}, rng);
  m.edge_encoder = nn::Mlp::glorot({kEdgeFeatureDim, hid, de}, rng);
  m.edge_update = nn::Mlp::glorot({2 * dn + de, hid, de}, rng);
  m.node_update = nn::Mlp::glorot({dn + de, hid, dn}, rng);
  m.classifier = nn::Mlp::glorot({de, dims.classifier_hidden, 1}, rng);
  m.lstm = nn::LstmParams::glorot(dims.feature_dim, dims.feature_dim, rng);
  return m;
}

MpnModel MpnModel::zeros_like() const {
  MpnModel m;
  m.dims = dims;
  m.node_encoder = node_encoder.zeros_like();
  m.edge_encoder = edge_encoder.zeros_like();
  m.edge_update = edge_update.zeros_like();
  m.node_update = node_update.zeros_like();
  m.classifier = classifier.zeros_like();
  m.lstm = lstm.zeros_like();
  return m;
}

nn::ParamList MpnModel::parameters() {
  nn::ParamList out;
  node_encoder.append_params("node_encoder", out);
  edge_encoder.append_params("edge_encoder", out);
  edge_update.append_params("edge_update", out);
  node_update.append_params("node_update", out);
  classifier.append_params("classifier", out);
  lstm.append_params("lstm", out);
  return out;
}

Mat track_feature_matrix(const AssocGraph& graph) {
  const int d = graph.tracks.empty() ? 0 : static_cast<int>(graph.tracks.front().feature.size());
  Mat out(static_cast<Eigen::Index>(graph.tracks.size()), d);
  for (std::size_t i = 0; i < graph.tracks.size(); ++i) {
    if (graph.tracks[i].feature.size() != d) throw std::invalid_argument("ragged track features");
    out.row(static_cast<Eigen::Index>(i)) = graph.tracks[i].feature.transpose();
  }
  return out;
}

namespace {

Mat detection_feature_matrix(const AssocGraph& graph, int d) {
  Mat out(static_cast<Eigen::Index>(graph.detections.size()), d);
  for (std::size_t j = 0; j < graph.detections.size(); ++j) {
    if (graph.detections[j].feature.size() != d) {
      throw std::invalid_argument("detection feature dimension mismatch");
    }
    out.row(static_cast<Eigen::Index>(j)) = graph.detections[j].feature.transpose();
  }
  return out;
}

Mat edge_feature_matrix(const AssocGraph& graph) {
  Mat out(static_cast<Eigen::Index>(graph.edges.size()), kEdgeFeatureDim);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    for (int k = 0; k < kEdgeFeatureDim; ++k) {
      out(static_cast<Eigen::Index>(e), k) = static_cast<Scalar>(graph.edges[e].feature[k]);
    }
  }
  return out;
}

// Rows of `nodes` selected by each edge's endpoint.
Mat gather(const Mat& nodes, const std::vector<Edge>& edges, bool track_side) {
  Mat out(static_cast<Eigen::Index>(edges.size()), nodes.cols());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out.row(static_cast<Eigen::Index>(e)) = nodes.row(track_side ? edges[e].track : edges[e].det);
  }
  return out;
}

void scatter_add(Mat& nodes, const Mat& rows, const std::vector<Edge>& edges, bool track_side) {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    nodes.row(track_side ? edges[e].track : edges[e].det) += rows.row(static_cast<Eigen::Index>(e));
  }
}

// Node embedding = aggregate of incident messages; isolated nodes keep `previous`.
Mat aggregate(const Mat& messages, const Mat& previous,
              const std::vector<std::vector<int>>& incidence, Aggregation agg) {
  Mat out = previous;
  for (std::size_t n = 0; n < incidence.size(); ++n) {
    const auto& inc = incidence[n];
    if (inc.empty()) continue;
    Vec acc = Vec::Zero(messages.cols());
    for (int e : inc) acc += messages.row(e).transpose();
    if (agg == Aggregation::Mean) acc /= static_cast<Scalar>(inc.size());
    out.row(static_cast<Eigen::Index>(n)) = acc.transpose();
  }
  return out;
}

// Inverse of aggregate: spreads node gradients onto messages; isolated nodes
// forward their gradient to the previous layer.
void aggregate_backward(const Mat& node_grad, const std::vector<std::vector<int>>& incidence,
                        Aggregation agg, Mat& message_grad, Mat& previous_grad) {
  for (std::size_t n = 0; n < incidence.size(); ++n) {
    const auto& inc = incidence[n];
    const auto row = static_cast<Eigen::Index>(n);
    if (inc.empty()) {
      previous_grad.row(row) += node_grad.row(row);
      continue;
    }
    const Scalar scale = agg == Aggregation::Mean ? Scalar(1) / static_cast<Scalar>(inc.size())
                                                  : Scalar(1);
    for (int e : inc) message_grad.row(e) += scale * node_grad.row(row);
  }
}

void check_indexed(const AssocGraph& graph) {
  if (graph.track_edges.size() != graph.tracks.size() ||
      graph.det_edges.size() != graph.detections.size()) {
    throw std::logic_error("association graph is not indexed; call reindex()");
  }
}

}  // namespace

MpnState encode(const AssocGraph& graph, const MpnModel& model, MpnTrace* trace,
                const Mat* track_features) {
  check_indexed(graph);
  const int d = model.dims.feature_dim;
  const Mat tf = track_features ? *track_features : track_feature_matrix(graph);
  if (tf.rows() != static_cast<Eigen::Index>(graph.tracks.size()) ||
      (tf.rows() > 0 && tf.cols() != d)) {
    throw std::invalid_argument("trajectory feature dimension does not match the model");
  }
  MpnState state;
  state.tracks.push_back(model.node_encoder.forward(tf.rows() ? tf : Mat(0, d),
                                                    trace ? &trace->track_encoder : nullptr));
  state.detections.push_back(model.node_encoder.forward(
      detection_feature_matrix(graph, d), trace ? &trace->det_encoder : nullptr));
  state.edges.push_back(
      model.edge_encoder.forward(edge_feature_matrix(graph), trace ? &trace->edge_encoder : nullptr));
  return state;
}

MpnState propagate(MpnState state, const AssocGraph& graph, const MpnModel& model, int rounds,
                   MpnTrace* trace) {
  check_indexed(graph);
  if (state.edges.empty()) throw std::logic_error("propagate needs an encoded state");
  const auto& edges = graph.edges;
  const Eigen::Index E = static_cast<Eigen::Index>(edges.size());
  const int dn = model.dims.node_dim;
  const int de = model.dims.edge_dim;
  for (int round = 0; round < rounds; ++round) {
    const Mat& T = state.tracks.back();
    const Mat& D = state.detections.back();
    const Mat& H = state.edges.back();
    if (E == 0) {
      // Every node is isolated: embeddings carry over unchanged.
      if (trace) {
        trace->edge_update.emplace_back();
        trace->track_update.emplace_back();
        trace->det_update.emplace_back();
      }
      Mat T_copy = T, D_copy = D, H_copy = H;
      state.tracks.push_back(std::move(T_copy));
      state.detections.push_back(std::move(D_copy));
      state.edges.push_back(std::move(H_copy));
      continue;
    }

    Mat edge_in(E, 2 * dn + de);
    edge_in << gather(T, edges, true), gather(D, edges, false), H;
    nn::Mlp::Cache* ec = nullptr;
    nn::Mlp::Cache* tc = nullptr;
    nn::Mlp::Cache* dc = nullptr;
    if (trace) {
      ec = &trace->edge_update.emplace_back();
      tc = &trace->track_update.emplace_back();
      dc = &trace->det_update.emplace_back();
    }
    Mat H_next = model.edge_update.forward(edge_in, ec);

    Mat track_in(E, dn + de);
    track_in << gather(T, edges, true), H_next;
    const Mat track_msg = model.node_update.forward(track_in, tc);

    Mat det_in(E, dn + de);
    det_in << gather(D, edges, false), H_next;
    const Mat det_msg = model.node_update.forward(det_in, dc);

    Mat T_next = aggregate(track_msg, T, graph.track_edges, model.dims.aggregation);
    Mat D_next = aggregate(det_msg, D, graph.det_edges, model.dims.aggregation);
    state.tracks.push_back(std::move(T_next));
    state.detections.push_back(std::move(D_next));
    state.edges.push_back(std::move(H_next));
  }
  return state;
}

Vec edge_logits(const MpnState& state, const MpnModel& model, MpnTrace* trace) {
  const Mat out = model.classifier.forward(state.edges.back(), trace ? &trace->classifier : nullptr);
  return out.col(0);
}

Vec classify_edges(const MpnState& state, const MpnModel& model) {
  return edge_logits(state, model).unaryExpr([](Scalar z) {
    return static_cast<Scalar>(nn::sigmoid(z));
  });
}

Vec mpn_forward(const AssocGraph& graph, const MpnModel& model, MpnTrace* trace,
                const Mat* track_features) {
  if (trace) *trace = MpnTrace{};
  MpnState state = encode(graph, model, trace, track_features);
  state = propagate(std::move(state), graph, model, model.dims.layers, trace);
  Vec logits = edge_logits(state, model, trace);
  if (trace) trace->state = std::move(state);
  return logits;
}

Vec score_edges(const AssocGraph& graph, const MpnModel& model) {
  MpnState state = propagate(encode(graph, model), graph, model);
  return classify_edges(state, model);
}

void mpn_backward(const AssocGraph& graph, const MpnModel& model, const MpnTrace& trace,
                  const Vec& logit_grad, MpnModel& grads, Mat* track_feature_grad) {
  const auto& edges = graph.edges;
  const Eigen::Index E = static_cast<Eigen::Index>(edges.size());
  const Eigen::Index M = static_cast<Eigen::Index>(graph.tracks.size());
  const Eigen::Index N = static_cast<Eigen::Index>(graph.detections.size());
  const int dn = model.dims.node_dim;
  const int de = model.dims.edge_dim;
  const int L = static_cast<int>(trace.edge_update.size());
  if (logit_grad.size() != E) throw std::invalid_argument("logit gradient size mismatch");
  if (trace.state.layers() != L) throw std::logic_error("MPN trace is incomplete");

  Mat dH = model.classifier.backward(trace.classifier, Mat(logit_grad), grads.classifier);
  Mat dT = Mat::Zero(M, dn);
  Mat dD = Mat::Zero(N, dn);

  for (int l = L; l >= 1; --l) {
    const int k = l - 1;  // cache index for round l
    if (E == 0) continue;
    Mat dT_prev = Mat::Zero(M, dn);
    Mat dD_prev = Mat::Zero(N, dn);

    Mat d_track_msg = Mat::Zero(E, dn);
    aggregate_backward(dT, graph.track_edges, model.dims.aggregation, d_track_msg, dT_prev);
    const Mat d_track_in =
        model.node_update.backward(trace.track_update[k], d_track_msg, grads.node_update);
    scatter_add(dT_prev, d_track_in.leftCols(dn), edges, true);
    dH += d_track_in.rightCols(de);

    Mat d_det_msg = Mat::Zero(E, dn);
    aggregate_backward(dD, graph.det_edges, model.dims.aggregation, d_det_msg, dD_prev);
    const Mat d_det_in =
        model.node_update.backward(trace.det_update[k], d_det_msg, grads.node_update);
    scatter_add(dD_prev, d_det_in.leftCols(dn), edges, false);
    dH += d_det_in.rightCols(de);

    const Mat d_edge_in = model.edge_update.backward(trace.edge_update[k], dH, grads.edge_update);
    scatter_add(dT_prev, d_edge_in.leftCols(dn), edges, true);
    scatter_add(dD_prev, d_edge_in.middleCols(dn, dn), edges, false);
    dH = d_edge_in.rightCols(de);
    dT = std::move(dT_prev);
    dD = std::move(dD_prev);
  }

  const Mat d_track_features =
      model.node_encoder.backward(trace.track_encoder, dT, grads.node_encoder);
  model.node_encoder.backward(trace.det_encoder, dD, grads.node_encoder);
  model.edge_encoder.backward(trace.edge_encoder, dH, grads.edge_encoder);
  if (track_feature_grad) *track_feature_grad = d_track_features;
}

}  // namespace sparsetrack
