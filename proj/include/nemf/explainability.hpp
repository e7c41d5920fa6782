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
#include <string>
#include <vector>

#include "nemf/dataset.hpp"
#include "nemf/neighborhood.hpp"
#include "nemf/side_matrix.hpp"

namespace nemf {

struct ExplainConfig {
  int k = 10;                  // neighbors used for explaining
  int positive_threshold = 4;  // ratings >= this count as positive

  void validate(RatingScale scale) const;
};

// Count of neighbor ratings per star value, index 0 == scale.min.
struct RatingHistogram {
  RatingScale scale{};
  std::vector<int> counts;

  int count(int rating) const { return counts.at(static_cast<std::size_t>(rating - scale.min)); }
  int total() const;
};

// Weighted frequency sum over positive ratings: sum_{r >= threshold} r * count(r).
double explainability_power(const RatingHistogram& histogram, int positive_threshold);

// Ratings the neighbors of `u` gave to item `i`.
RatingHistogram neighbor_histogram(const RatingMatrix& matrix,
                                   const NeighborGraph& user_graph,
                                   std::uint32_t u, std::uint32_t i);

// E[u,i] = sum over neighbors v of u with r(v,i) >= P_tau of r(v,i).
// `graph` must have been built with cfg.k.
SideMatrix build_user_style_E(const RatingMatrix& matrix, const NeighborGraph& graph,
                              const ExplainConfig& cfg, int workers = 1);

// Item style: E[u,i] = sum over items j in NN^k(i) that u rated >= P_tau of
// r(u,j). `item_graph` must have been built with cfg.k.
SideMatrix build_item_style_E(const RatingMatrix& matrix,
                              const NeighborGraph& item_graph,
                              const ExplainConfig& cfg, int workers = 1);

// Upper bound of a single E entry: scale.max * k.
// The user's positive ratings on the k nearest neighbours of item i, most
// similar neighbour first. Their sum is the item-style E[u, i].
std::vector<RatingEntry> item_style_reasons(const RatingMatrix& matrix,
                                            const NeighborGraph& item_graph,
                                            const ExplainConfig& cfg, std::uint32_t u,
                                            std::uint32_t i);

double explainability_max(const ExplainConfig& cfg, RatingScale scale);

// Divides every entry by scale.max * k so weights land in [0, 1].
SideMatrix normalize(const SideMatrix& raw, const ExplainConfig& cfg, RatingScale scale);

// Human-readable user-style explanation for one (user, item) pair.
std::string render_explanation(const RatingHistogram& histogram, const ExplainConfig& cfg,
                               const std::string& item_title);

}  // namespace nemf
