#include "km/types.hpp"

#include <cmath>
#include <stdexcept>

namespace km {

namespace {

void check_dim_at_least_two(int d) {
  if (d < 2) {
    throw std::invalid_argument("model dimension must be at least 2, got " +
                                std::to_string(d));
  }
}

}  // namespace

SimplexVector::SimplexVector(Eigen::VectorXd entries)
    : entries_(std::move(entries)) {
  check_dim_at_least_two(static_cast<int>(entries_.size()));
  double sum = 0.0;
  for (int i = 0; i < entries_.size(); ++i) {
    double v = entries_[i];
    if (v < 0.0) {
      if (v < -1e-12) {
        throw std::invalid_argument("simplex entry " + std::to_string(i) +
                                    " is negative: " + std::to_string(v));
      }
      v = 0.0;
      entries_[i] = 0.0;
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw std::invalid_argument("simplex entries sum to " +
                                std::to_string(sum) + ", expected 1");
  }
  entries_ /= sum;
}

SimplexVector::SimplexVector(std::initializer_list<double> entries)
    : SimplexVector(Eigen::Map<const Eigen::VectorXd>(
          entries.begin(), static_cast<Eigen::Index>(entries.size()))) {}

SimplexVector SimplexVector::uniform(int d) {
  check_dim_at_least_two(d);
  return SimplexVector(Eigen::VectorXd::Constant(d, 1.0 / d));
}

IndicatorVector::IndicatorVector(std::vector<uint8_t> bits)
    : bits_(std::move(bits)) {
  check_dim_at_least_two(static_cast<int>(bits_.size()));
  for (uint8_t b : bits_) {
    if (b != 0 && b != 1) {
      throw std::invalid_argument("indicator entries must be 0 or 1");
    }
  }
}

IndicatorVector::IndicatorVector(const Eigen::VectorXd& entries) {
  check_dim_at_least_two(static_cast<int>(entries.size()));
  bits_.resize(entries.size());
  for (int i = 0; i < entries.size(); ++i) {
    if (entries[i] == 0.0) {
      bits_[i] = 0;
    } else if (entries[i] == 1.0) {
      bits_[i] = 1;
    } else {
      throw std::invalid_argument("indicator entries must be exactly 0 or 1");
    }
  }
}

IndicatorVector::IndicatorVector(std::initializer_list<int> bits) {
  check_dim_at_least_two(static_cast<int>(bits.size()));
  bits_.reserve(bits.size());
  for (int b : bits) {
    if (b != 0 && b != 1) {
      throw std::invalid_argument("indicator entries must be 0 or 1");
    }
    bits_.push_back(static_cast<uint8_t>(b));
  }
}

Eigen::VectorXd IndicatorVector::vec() const {
  Eigen::VectorXd v(bits_.size());
  for (size_t i = 0; i < bits_.size(); ++i) v[static_cast<int>(i)] = bits_[i];
  return v;
}

std::vector<int> IndicatorVector::support() const {
  std::vector<int> s;
  for (size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) s.push_back(static_cast<int>(i));
  }
  return s;
}

IndicatorVector IndicatorVector::zeros(int d) {
  return IndicatorVector(std::vector<uint8_t>(d, 0));
}

IndicatorVector IndicatorVector::ones(int d) {
  return IndicatorVector(std::vector<uint8_t>(d, 1));
}

void KmParams::validate() const {
  check_dim_at_least_two(dim);
  for (const auto& [u, th] : theta) {
    if (th.dim() != dim) {
      throw std::invalid_argument("theta dimension mismatch for user " +
                                  std::to_string(u));
    }
  }
  for (const auto& [i, ps] : psi) {
    if (ps.dim() != dim) {
      throw std::invalid_argument("psi dimension mismatch for item " +
                                  std::to_string(i));
    }
  }
}

RatingDataset::RatingDataset(const std::vector<RawTriple>& raw, double r_max)
    : r_max_(r_max) {
  if (r_max <= 0.0) {
    throw std::invalid_argument("r_max must be positive");
  }
  triples_.reserve(raw.size());
  std::unordered_map<int64_t, int> seen;
  seen.reserve(raw.size());
  for (const auto& t : raw) {
    if (t.p < 0.0 || t.p > 1.0) {
      throw std::invalid_argument(
          "empirical probability out of [0,1]: " + std::to_string(t.p) +
          " for pair (" + std::to_string(t.user) + "," +
          std::to_string(t.item) + ")");
    }
    auto [uit, unew] = user_index_.try_emplace(
        t.user, static_cast<int>(user_ids_.size()));
    if (unew) user_ids_.push_back(t.user);
    auto [iit, inew] = item_index_.try_emplace(
        t.item, static_cast<int>(item_ids_.size()));
    if (inew) item_ids_.push_back(t.item);

    const int64_t key =
        (static_cast<int64_t>(uit->second) << 32) | iit->second;
    if (!seen.emplace(key, 1).second) {
      throw std::invalid_argument("duplicate (user,item) pair: (" +
                                  std::to_string(t.user) + "," +
                                  std::to_string(t.item) + ")");
    }
    triples_.push_back({uit->second, iit->second, t.p, t.split});
  }
}

int RatingDataset::dense_user(int raw) const {
  auto it = user_index_.find(raw);
  return it == user_index_.end() ? -1 : it->second;
}

int RatingDataset::dense_item(int raw) const {
  auto it = item_index_.find(raw);
  return it == item_index_.end() ? -1 : it->second;
}

size_t RatingDataset::train_count() const {
  size_t n = 0;
  for (const auto& t : triples_) n += (t.split == Split::Train);
  return n;
}

size_t RatingDataset::test_count() const {
  return triples_.size() - train_count();
}

RatingDataset RatingDataset::with_splits(
    const std::vector<Split>& splits) const {
  if (splits.size() != triples_.size()) {
    throw std::invalid_argument("split label count mismatch");
  }
  RatingDataset out = *this;
  for (size_t k = 0; k < splits.size(); ++k) out.triples_[k].split = splits[k];
  return out;
}

}  // namespace km
