#include "km/interpret.hpp"

#include <algorithm>
#include <stdexcept>

namespace km {

namespace {

// supp(inner) subset of supp(outer)?
bool support_included(const IndicatorVector& inner,
                      const IndicatorVector& outer) {
  for (int k = 0; k < inner.dim(); ++k) {
    if (inner.bit(k) && !outer.bit(k)) return false;
  }
  return true;
}

}  // namespace

AdjacencyMatrix build_adjacency(const std::map<int, IndicatorVector>& psis) {
  if (psis.empty()) {
    throw std::invalid_argument("cannot build adjacency from an empty model");
  }
  AdjacencyMatrix out;
  out.items.reserve(psis.size());
  std::vector<const IndicatorVector*> vecs;
  vecs.reserve(psis.size());
  for (const auto& [item, psi] : psis) {
    out.items.push_back(item);
    vecs.push_back(&psi);
  }
  const int n = out.size();
  out.entries.assign(n, std::vector<uint8_t>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.entries[i][j] = support_included(*vecs[j], *vecs[i]) ? 1 : 0;
    }
  }
  return out;
}

InfluenceScores influence_scores(const AdjacencyMatrix& adjacency) {
  InfluenceScores out;
  out.items = adjacency.items;
  const int n = adjacency.size();
  out.scores.resize(n);
  for (int i = 0; i < n; ++i) {
    long row_sum = 0;
    for (int j = 0; j < n; ++j) row_sum += adjacency.entries[i][j];
    out.scores[i] = static_cast<double>(row_sum) / n;
  }
  return out;
}

std::optional<ImpliedRelations> implied_relations(
    const std::map<int, IndicatorVector>& psis, int i, int j) {
  auto it_i = psis.find(i);
  auto it_j = psis.find(j);
  if (it_i == psis.end() || it_j == psis.end()) {
    throw std::invalid_argument("unknown item index in relation query");
  }
  if (!support_included(it_j->second, it_i->second)) {
    return std::nullopt;
  }
  ImpliedRelations rel;
  rel.antecedent_item = i;
  rel.consequent_item = j;
  rel.forward = "X_" + std::to_string(i) + "=1 => X_" + std::to_string(j) + "=1";
  rel.backward = "X_" + std::to_string(j) + "=0 => X_" + std::to_string(i) + "=0";
  return rel;
}

std::vector<MiningRow> mining_accuracy(const KmParams& params,
                                       const RatingDataset& data,
                                       double like_threshold,
                                       bool require_anchor_liked) {
  const AdjacencyMatrix adjacency = build_adjacency(params.psi);
  const InfluenceScores scores = influence_scores(adjacency);

  std::vector<int> anchors;
  for (int k = 0; k < adjacency.size(); ++k) {
    if (scores.scores[k] == 1.0) anchors.push_back(scores.items[k]);
  }
  std::vector<MiningRow> rows;
  if (anchors.empty()) return rows;

  // Train ratings grouped per user.
  std::map<int, std::vector<std::pair<int, double>>> by_user;
  for (const auto& t : data.triples()) {
    if (t.split != Split::Train) continue;
    by_user[t.user].push_back({t.item, t.p});
  }

  for (int anchor : anchors) {
    for (const auto& [user, ratings] : by_user) {
      const auto anchor_rating =
          std::find_if(ratings.begin(), ratings.end(),
                       [&](const auto& r) { return r.first == anchor; });
      if (anchor_rating == ratings.end()) continue;
      if (require_anchor_liked && anchor_rating->second < like_threshold) {
        continue;
      }
      int liked = 0;
      for (const auto& [item, p] : ratings) {
        liked += (p >= like_threshold);
      }
      MiningRow row;
      row.item = anchor;
      row.user = user;
      row.rated_count = static_cast<int>(ratings.size());
      row.accuracy = static_cast<double>(liked) / ratings.size();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace km
