#pragma once

// Weight checkpoints: one JSON header line describing every network
// (name, widths, activations) plus run metadata, followed by the raw
// little-endian doubles of each network in header order. Reloading is
// bit-exact.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ice/nn.hpp"

namespace ice {

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint64_t update_count = 0;
  std::map<std::string, std::string> extra;
};

struct Checkpoint {
  CheckpointMeta meta;
  std::vector<std::pair<std::string, DenseNet>> networks;

  const DenseNet& network(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const std::vector<std::pair<std::string, const DenseNet*>>& networks);
// Throws Error naming the path on I/O or format problems.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ice
