#include "sparsetrack/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sparsetrack/mot_io.hpp"

namespace sparsetrack {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("checkpoint truncated");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

json dims_to_json(const MpnDims& d) {
  return {{"feature_dim", d.feature_dim}, {"node_dim", d.node_dim},
          {"edge_dim", d.edge_dim},       {"hidden_dim", d.hidden_dim},
          {"classifier_hidden", d.classifier_hidden}, {"layers", d.layers},
          {"aggregation", to_string(d.aggregation)}};
}

MpnDims dims_from_json(const json& j) {
  MpnDims d;
  d.feature_dim = j.at("feature_dim").get<int>();
  d.node_dim = j.at("node_dim").get<int>();
  d.edge_dim = j.at("edge_dim").get<int>();
  d.hidden_dim = j.at("hidden_dim").get<int>();
  d.classifier_hidden = j.at("classifier_hidden").get<int>();
  d.layers = j.at("layers").get<int>();
  d.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
  return d;
}

struct Tensor {
  std::string name;
  std::vector<int> shape;
  std::span<Scalar> values;
};

std::vector<Tensor> tensors_of(MpnModel& model, nn::AdamState* adam) {
  std::vector<Tensor> out;
  const nn::ParamList params = model.parameters();
  for (const auto& p : params) out.push_back({p.name, p.shape, p.values});
  if (adam) {
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto& m = adam->first_moment[k];
      auto& v = adam->second_moment[k];
      out.push_back({"adam.m." + params[k].name, params[k].shape, {m.data(), static_cast<std::size_t>(m.size())}});
      out.push_back({"adam.v." + params[k].name, params[k].shape, {v.data(), static_cast<std::size_t>(v.size())}});
    }
  }
  return out;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Checkpoint copy = ckpt;
  nn::AdamState* adam = copy.adam ? &*copy.adam : nullptr;
  if (adam && adam->first_moment.empty()) {
    for (const auto& p : copy.model.parameters()) {
      adam->first_moment.push_back(Vec::Zero(static_cast<Eigen::Index>(p.values.size())));
      adam->second_moment.push_back(Vec::Zero(static_cast<Eigen::Index>(p.values.size())));
    }
  }
  const auto tensors = tensors_of(copy.model, adam);

  json header;
  header["format"] = "sparsetrack-checkpoint";
  header["dims"] = dims_to_json(copy.model.dims);
  header["step"] = copy.step;
  header["epoch"] = copy.epoch;
  header["integration"] = copy.integration;
  if (adam) {
    header["adam"] = {{"beta1", adam->beta1}, {"beta2", adam->beta2},
                      {"epsilon", adam->epsilon}, {"step", adam->step}};
  }
  json list = json::array();
  for (const auto& t : tensors) list.push_back({{"name", t.name}, {"shape", t.shape}});
  header["tensors"] = list;
  const std::string text = header.dump();

  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& t : tensors) {
    for (Scalar v : t.values) put<double>(out, static_cast<double>(v));
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kCheckpointMagic ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0) {
    throw std::runtime_error("not a checkpoint file (bad magic)");
  }
  std::size_t pos = sizeof kCheckpointMagic;
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = take<std::uint64_t>(bytes, pos);
  if (pos + length > bytes.size()) throw std::runtime_error("checkpoint truncated");
  const json header = json::parse(bytes.substr(pos, length));
  pos += length;

  Checkpoint ckpt;
  ckpt.model = MpnModel::init(dims_from_json(header.at("dims")), 0);
  ckpt.step = header.at("step").get<std::int64_t>();
  ckpt.epoch = header.at("epoch").get<int>();
  ckpt.integration = header.value("integration", std::string("iou"));
  if (header.contains("adam")) {
    nn::AdamState adam;
    const auto& a = header["adam"];
    adam.beta1 = a.at("beta1").get<double>();
    adam.beta2 = a.at("beta2").get<double>();
    adam.epsilon = a.at("epsilon").get<double>();
    adam.step = a.at("step").get<std::int64_t>();
    for (const auto& p : ckpt.model.parameters()) {
      adam.first_moment.push_back(Vec::Zero(static_cast<Eigen::Index>(p.values.size())));
      adam.second_moment.push_back(Vec::Zero(static_cast<Eigen::Index>(p.values.size())));
    }
    ckpt.adam = std::move(adam);
  }
  const auto tensors = tensors_of(ckpt.model, ckpt.adam ? &*ckpt.adam : nullptr);
  const auto& listed = header.at("tensors");
  if (listed.size() != tensors.size()) throw std::runtime_error("checkpoint tensor count mismatch");
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const auto& t = tensors[k];
    if (listed[k].at("name").get<std::string>() != t.name ||
        listed[k].at("shape").get<std::vector<int>>() != t.shape) {
      throw std::runtime_error("checkpoint tensor '" + listed[k].at("name").get<std::string>() +
                               "' does not match the model layout");
    }
    for (Scalar& v : t.values) v = static_cast<Scalar>(take<double>(bytes, pos));
  }
  if (pos != bytes.size()) throw std::runtime_error("trailing bytes after checkpoint payload");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace sparsetrack
