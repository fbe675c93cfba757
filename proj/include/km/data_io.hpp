#pragma once

#include <filesystem>
#include <iosfwd>

#include "km/types.hpp"

namespace km {

struct SplitConfig {
  double train_fraction = 0.8;
  uint64_t seed = 0;
};

struct SyntheticConfig {
  int num_users = 20;
  int num_items = 40;
  uint64_t seed = 0;
};

// MovieLens 100K format: tab-separated "user item rating timestamp",
// integer ratings 1..5. Timestamps are parsed and discarded.
RatingDataset load_ml100k(const std::filesystem::path& path);

// MovieLens 1M format: "user::item::rating::timestamp".
RatingDataset load_ml1m(const std::filesystem::path& path);

// Uniform random partition of all triples into train/test. Deterministic
// under the seed; |train| = round(train_fraction * n).
RatingDataset split_dataset(const RatingDataset& data, const SplitConfig& cfg);

// Dense num_users x num_items grid of probabilities i.i.d. uniform on
// [0,1], all labeled train.
RatingDataset generate_synthetic(const SyntheticConfig& cfg);

// One JSON object per line: {"u": raw_user, "i": raw_item, "p": value,
// "split": "train"|"test"}.
void save_jsonl(const RatingDataset& data, std::ostream& out);
void save_jsonl(const RatingDataset& data, const std::filesystem::path& path);
RatingDataset load_jsonl(std::istream& in);
RatingDataset load_jsonl(const std::filesystem::path& path);

}  // namespace km
