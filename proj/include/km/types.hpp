#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace km {

// Probability mass vector on the unit simplex. Entries are validated and
// renormalized on construction; drift up to 1e-9 in the sum is accepted
// because iterative solvers accumulate rounding.
class SimplexVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit SimplexVector(Eigen::VectorXd entries);
  SimplexVector(std::initializer_list<double> entries);

  int dim() const { return static_cast<int>(entries_.size()); }
  const Eigen::VectorXd& vec() const { return entries_; }
  double operator[](int i) const { return entries_[i]; }

  // Uniform mass point of dimension d.
  static SimplexVector uniform(int d);

 private:
  Eigen::VectorXd entries_;
};

// Binary indicator vector; each entry is exactly 0 or 1.
class IndicatorVector {
 public:
  explicit IndicatorVector(std::vector<uint8_t> bits);
  explicit IndicatorVector(const Eigen::VectorXd& entries);
  IndicatorVector(std::initializer_list<int> bits);

  int dim() const { return static_cast<int>(bits_.size()); }
  bool bit(int i) const { return bits_[i] != 0; }
  const std::vector<uint8_t>& bits() const { return bits_; }
  Eigen::VectorXd vec() const;
  std::vector<int> support() const;

  static IndicatorVector zeros(int d);
  static IndicatorVector ones(int d);

  bool operator==(const IndicatorVector& other) const {
    return bits_ == other.bits_;
  }

 private:
  std::vector<uint8_t> bits_;
};

// Trained model parameters: one simplex vector per user, one indicator
// vector per item, all of shared dimension D >= 2. Keys are dense indices.
struct KmParams {
  std::map<int, SimplexVector> theta;
  std::map<int, IndicatorVector> psi;
  int dim = 0;

  void validate() const;
};

enum class Split : uint8_t { Train = 0, Test = 1 };

struct RatingTriple {
  int user = 0;  // dense index
  int item = 0;  // dense index
  double p = 0.0;
  Split split = Split::Train;
};

// Sparse (user, item, empirical probability) triples with a train/test
// partition. Raw dataset ids (e.g. 1-based MovieLens ids) are remapped to
// dense 0-based indices in order of first appearance; the bidirectional
// maps are kept for reporting.
class RatingDataset {
 public:
  struct RawTriple {
    int user = 0;  // raw id
    int item = 0;  // raw id
    double p = 0.0;
    Split split = Split::Train;
  };

  RatingDataset(const std::vector<RawTriple>& raw, double r_max);

  const std::vector<RatingTriple>& triples() const { return triples_; }
  double r_max() const { return r_max_; }
  int num_users() const { return static_cast<int>(user_ids_.size()); }
  int num_items() const { return static_cast<int>(item_ids_.size()); }

  int raw_user_id(int dense) const { return user_ids_.at(dense); }
  int raw_item_id(int dense) const { return item_ids_.at(dense); }
  const std::vector<int>& user_ids() const { return user_ids_; }
  const std::vector<int>& item_ids() const { return item_ids_; }

  // -1 when the raw id is unknown.
  int dense_user(int raw) const;
  int dense_item(int raw) const;

  size_t train_count() const;
  size_t test_count() const;

  // Rebuild with new split labels (same triples, same id maps).
  RatingDataset with_splits(const std::vector<Split>& splits) const;

 private:
  std::vector<RatingTriple> triples_;
  std::vector<int> user_ids_;
  std::vector<int> item_ids_;
  std::unordered_map<int, int> user_index_;
  std::unordered_map<int, int> item_index_;
  double r_max_ = 1.0;
};

}  // namespace km
