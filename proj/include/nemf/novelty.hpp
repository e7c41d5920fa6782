// Copyright 2026 The NEMF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "nemf/dataset.hpp"
#include "nemf/side_matrix.hpp"

namespace nemf {

enum class NoveltyKind {
  kDistance,       // unexpectedness: mean Jaccard distance to the user's items
  kPopularity,     // global long tail: -log2(|U_i| / |U|)
  kTopicCoverage,  // 1 / (# user items in the category), averaged over genres
};

NoveltyKind parse_novelty_kind(std::string_view name);
std::string_view to_string(NoveltyKind kind);

// 1 - |G_i & G_j| / |G_i | G_j| over catalog genre masks.
double jaccard_distance(GenreMask a, GenreMask b);
double jaccard_distance(const ItemCatalog& catalog, std::size_t i, std::size_t j);

// Mean distance from item i to every item in I_u; 1 for an empty history.
// Direct O(|I_u|) evaluation.
double distance_novelty(const RatingMatrix& matrix, const ItemCatalog& catalog,
                        std::uint32_t u, std::uint32_t i);

// -log2(|U_i| / |U|); unrated items clamp to -log2(1 / |U|).
double popularity_novelty(const RatingMatrix& matrix, std::uint32_t i);

// 1 / |{j in I_u : j in genre c}|; 1 when the user has no item of that genre.
double topic_coverage_novelty(const RatingMatrix& matrix, const ItemCatalog& catalog,
                              std::uint32_t u, std::size_t genre);

// Ideal novelty of the kind: 1, -log2(1 / |U|), 1.
double novelty_max(NoveltyKind kind, const RatingMatrix& matrix);

// Per-user novelty oracle built once over a training matrix. Distance novelty
// groups each user's history by distinct genre mask and weights the Jaccard
// distance by group size, which is much cheaper than the direct average when
// many items share a mask.
class NoveltyModel {
 public:
  NoveltyModel(const RatingMatrix& train, const ItemCatalog& catalog, NoveltyKind kind);

  NoveltyKind kind() const { return kind_; }
  double max() const { return max_; }
  double operator()(std::uint32_t u, std::uint32_t i) const;

 private:
  NoveltyKind kind_;
  const ItemCatalog* catalog_;
  std::size_t n_users_;
  double max_;
  // distance
  std::vector<std::vector<std::pair<GenreMask, std::uint32_t>>> groups_;
  std::vector<std::uint32_t> history_size_;
  // popularity
  std::vector<double> popularity_;
  // topic coverage: n_users x n_genres counts
  std::vector<std::uint32_t> genre_counts_;
};

// N[u,i] for every observed training pair (u, i), raw (not normalized).
SideMatrix build_N_matrix(const RatingMatrix& train, const ItemCatalog& catalog,
                          NoveltyKind kind, int workers = 1);

// The novelty matrix as consumed by training: distance and topic-coverage
// weights are already in [0, 1]; popularity weights are divided by N_max.
SideMatrix training_novelty(const SideMatrix& raw, const RatingMatrix& train);

}  // namespace nemf
