// Cross-family held-out protocol: optimize on two models from one family,
// evaluate on a held-out model from a different family.
#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "confuse/model/surrogate.hpp"

namespace confuse {

struct ModelTag {
  std::string model_id;
  std::string family;
};

struct TransferSplit {
  std::vector<std::string> train_ids;  // exactly two, one family
  std::string heldout_id;              // different family
};

inline std::vector<ModelTag> tags_of(std::span<const ModelPtr> models) {
  std::vector<ModelTag> tags;
  tags.reserve(models.size());
  for (const auto& m : models) tags.push_back(ModelTag{m->model_id(), m->family()});
  return tags;
}

// All valid splits, in a canonical deterministic order (sorted by train pair,
// then held-out id).
inline std::vector<TransferSplit> enumerate_transfer_splits(std::span<const ModelTag> models) {
  std::vector<ModelTag> sorted(models.begin(), models.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ModelTag& a, const ModelTag& b) { return a.model_id < b.model_id; });
  std::vector<TransferSplit> splits;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (sorted[i].family != sorted[j].family) continue;
      for (std::size_t h = 0; h < sorted.size(); ++h) {
        if (h == i || h == j) continue;
        if (sorted[h].family == sorted[i].family) continue;
        splits.push_back(TransferSplit{{sorted[i].model_id, sorted[j].model_id},
                                       sorted[h].model_id});
      }
    }
  }
  return splits;
}

// First valid split in canonical order.
inline TransferSplit make_transfer_split(std::span<const ModelTag> models) {
  std::vector<TransferSplit> splits = enumerate_transfer_splits(models);
  if (splits.empty()) {
    throw ProtocolError(
        "no valid transfer split: need >= 3 models spanning >= 2 families with one family "
        "holding >= 2 models");
  }
  return splits.front();
}

inline TransferSplit make_transfer_split(std::span<const ModelPtr> models) {
  std::vector<ModelTag> tags = tags_of(models);
  return make_transfer_split(std::span<const ModelTag>(tags));
}

}  // namespace confuse
