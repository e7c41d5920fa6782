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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "nemf/dataset.hpp"

namespace nemf {

// Pearson correlation of two sparse rating vectors (sorted by index) over
// their co-rated positions, using the means of the co-rated values only.
// Fewer than two co-rated positions or zero variance on either side yields 0.
// The result is clamped to [-1, 1] and symmetric in its arguments.
double pearson(std::span<const RatingEntry> a, std::span<const RatingEntry> b);

double pearson(const RatingMatrix& matrix, std::uint32_t u, std::uint32_t v);
double item_pearson(const RatingMatrix& matrix, std::uint32_t i, std::uint32_t j);

struct Neighbor {
  std::uint32_t index = 0;
  double similarity = 0.0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Per-node top-k neighbor lists, ordered by similarity descending with ties
// broken by ascending index. Similarities are compared through
// similarity_key, so values equal up to rounding (two co-rated items give
// exactly +-1 in exact arithmetic) count as ties. Nodes sharing no rating are never neighbors;
// zero and negative similarities only fill slots positive ones leave open.
class NeighborGraph {
 public:
  NeighborGraph() = default;
  NeighborGraph(int k, std::vector<std::vector<Neighbor>> lists);

  int k() const { return k_; }
  std::size_t size() const { return lists_.size(); }
  std::span<const Neighbor> neighbors(std::uint32_t node) const;

  friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;

 private:
  int k_ = 0;
  std::vector<std::vector<Neighbor>> lists_;
};

// User-user kNN graph.
NeighborGraph build_user_graph(const RatingMatrix& matrix, int k, int workers = 1);
// Item-item kNN graph (Pearson over item columns).
NeighborGraph build_item_graph(const RatingMatrix& matrix, int k, int workers = 1);

// Ordering key: similarity rounded to 1e-12.
std::int64_t similarity_key(double similarity);

// Orders a candidate set and keeps the first k.
std::vector<Neighbor> select_top_k(std::vector<Neighbor> candidates, int k);

// Stable fingerprint of the matrix contents, used to key graph caches.
std::uint64_t fingerprint(const RatingMatrix& matrix);

// Line-based cache: a header `nemf-graph <fingerprint> <k> <nodes>` followed
// by `node neighbor similarity` lines (similarity in hex-float).
void save_graph(const NeighborGraph& graph, std::uint64_t fingerprint,
                const std::filesystem::path& path);
// Returns nullopt when the file is missing or keyed to different data / k.
std::optional<NeighborGraph> load_graph(const std::filesystem::path& path,
                                        std::uint64_t fingerprint, int k);

}  // namespace nemf
