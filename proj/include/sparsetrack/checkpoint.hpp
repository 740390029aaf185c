#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sparsetrack/mpn.hpp"
#include "sparsetrack/nn.hpp"

namespace sparsetrack {

inline constexpr char kCheckpointMagic[8] = {'S', 'P', 'T', 'R', 'K', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  MpnModel model;
  std::int64_t step = 0;  // optimizer steps taken so far
  int epoch = 0;          // completed epochs
  std::string integration = "iou";  // integration mode the model was trained with
  std::optional<nn::AdamState> adam;
};

// Layout: magic, u32 version, u64 header length, JSON header, then every tensor
// listed in the header as little-endian float64 in storage order.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sparsetrack
