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
#include <iosfwd>
#include <vector>

#include "nemf/dataset.hpp"
#include "nemf/factorization.hpp"

namespace nemf {

struct ScoredItem {
  std::uint32_t item = 0;
  double score = 0.0;
  friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

// Recommendation list L_u. `requested` is the N asked for; a list shorter
// than that (not enough candidates) is flagged by truncated().
struct RankedList {
  std::uint32_t user = 0;
  std::size_t requested = 0;
  std::vector<ScoredItem> items;

  bool truncated() const { return items.size() < requested; }
  friend bool operator==(const RankedList&, const RankedList&) = default;
};

// Top-N unrated items by predicted score (desc), ties by item index (asc).
RankedList top_n(const FactorModel& model, const RatingMatrix& train, std::uint32_t u,
                 std::size_t n);

// Greedy maximal-marginal-relevance selection of `n` items from `candidates`:
//   argmax (1 - lambda) * rel(i) + lambda * avg_{j in L} jaccard_distance(i, j)
// rel is the candidate score min-max normalized over the pool (0.5 for a
// constant pool). The diversity term of the first pick is 1. Ties keep the
// candidate order. Output items carry their original predicted scores.
RankedList mmr_rerank(const RankedList& candidates, const ItemCatalog& catalog,
                      std::size_t n, double lambda);

// `user item rank score` lines in external ids.
void write_recommendations(std::ostream& out, const RankedList& list, const IdMap& users,
                           const IdMap& items);

}  // namespace nemf
