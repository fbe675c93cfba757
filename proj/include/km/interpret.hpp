#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "km/types.hpp"

namespace km {

// Logical-relation indicator over the trained items: entry (i, j) is 1 when
// supp(psi_j) is contained in supp(psi_i). `items` maps row/column position
// to the item index the psi map used.
struct AdjacencyMatrix {
  std::vector<int> items;
  std::vector<std::vector<uint8_t>> entries;

  int size() const { return static_cast<int>(items.size()); }
};

AdjacencyMatrix build_adjacency(const std::map<int, IndicatorVector>& psis);

// Row means of the adjacency matrix: the normalized count of items whose
// outcome item i logically implies.
struct InfluenceScores {
  std::vector<int> items;
  std::vector<double> scores;
};

InfluenceScores influence_scores(const AdjacencyMatrix& adjacency);

// The implication pair carried by a support inclusion: X_i = 1 forces
// X_j = 1, and X_j = 0 forces X_i = 0.
struct ImpliedRelations {
  int antecedent_item = 0;  // i
  int consequent_item = 0;  // j
  std::string forward;
  std::string backward;
};

std::optional<ImpliedRelations> implied_relations(
    const std::map<int, IndicatorVector>& psis, int i, int j);

struct MiningRow {
  int item = 0;       // dense index of an item with influence score 1
  int user = 0;       // dense index of a train user who liked it
  int rated_count = 0;
  double accuracy = 0.0;
};

// For every maximally-supported item (influence score 1) and every train
// user whose empirical probability for it clears like_threshold, the
// fraction of that user's rated items also clearing the threshold. Setting
// require_anchor_liked=false drops the threshold filter on the anchor item.
std::vector<MiningRow> mining_accuracy(const KmParams& params,
                                       const RatingDataset& data,
                                       double like_threshold,
                                       bool require_anchor_liked = true);

}  // namespace km
