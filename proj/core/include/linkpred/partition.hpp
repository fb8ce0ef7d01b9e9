#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace linkpred {

// Node -> community assignment with contiguous community ids 0..k-1.
struct Partition {
  std::vector<std::int32_t> community_of;
  std::int32_t k = 0;

  std::size_t num_nodes() const { return community_of.size(); }

  void validate() const {
    if (k < 0) throw std::invalid_argument("partition: negative k");
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    for (const auto c : community_of) {
      if (c < 0 || c >= k) {
        throw std::invalid_argument("partition: community id out of range");
      }
      seen[static_cast<std::size_t>(c)] = true;
    }
    for (const bool s : seen) {
      if (!s) throw std::invalid_argument("partition: non-contiguous ids");
    }
  }

  // Renumbers arbitrary labels to contiguous ids in order of first appearance.
  static Partition from_labels(const std::vector<std::int32_t>& labels) {
    Partition p;
    p.community_of.reserve(labels.size());
    std::unordered_map<std::int32_t, std::int32_t> remap;
    for (const auto label : labels) {
      const auto [it, inserted] =
          remap.emplace(label, static_cast<std::int32_t>(remap.size()));
      p.community_of.push_back(it->second);
      (void)inserted;
    }
    p.k = static_cast<std::int32_t>(remap.size());
    return p;
  }
};

}  // namespace linkpred
