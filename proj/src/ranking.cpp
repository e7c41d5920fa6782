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
#include "nemf/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nemf/errors.hpp"
#include "nemf/novelty.hpp"

namespace nemf {

RankedList top_n(const FactorModel& model, const RatingMatrix& train, std::uint32_t u,
                 std::size_t n) {
  if (u >= model.n_users() || u >= train.n_users()) {
    throw LookupError("user index " + std::to_string(u) + " out of range");
  }
  if (model.n_items() != train.n_items()) {
    throw ConfigError("model and rating matrix disagree on the item count");
  }
  const auto rated = train.user_row(u);
  std::vector<ScoredItem> pool;
  pool.reserve(train.n_items() - rated.size());
  std::size_t next_rated = 0;
  for (std::uint32_t i = 0; i < train.n_items(); ++i) {
    if (next_rated < rated.size() && rated[next_rated].index == i) {
      ++next_rated;
      continue;
    }
    pool.push_back({i, model.predict(u, i)});
  }
  const auto keep = std::min(n, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(),
                    [](const ScoredItem& a, const ScoredItem& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.item < b.item;
                    });
  pool.resize(keep);
  return RankedList{u, n, std::move(pool)};
}

RankedList mmr_rerank(const RankedList& candidates, const ItemCatalog& catalog,
                      std::size_t n, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("MMR trade-off must lie in [0, 1]");
  }
  const auto& pool = candidates.items;
  double lo = 0.0, hi = 0.0;
  if (!pool.empty()) {
    const auto [mn, mx] = std::minmax_element(
        pool.begin(), pool.end(),
        [](const ScoredItem& a, const ScoredItem& b) { return a.score < b.score; });
    lo = mn->score;
    hi = mx->score;
  }
  std::vector<double> relevance(pool.size());
  for (std::size_t c = 0; c < pool.size(); ++c) {
    relevance[c] = hi > lo ? (pool[c].score - lo) / (hi - lo) : 0.5;
  }
  std::vector<double> distance_sum(pool.size(), 0.0);
  std::vector<char> taken(pool.size(), 0);
  RankedList out{candidates.user, n, {}};
  const std::size_t picks = std::min(n, pool.size());
  for (std::size_t step = 0; step < picks; ++step) {
    std::size_t best = pool.size();
    double best_value = 0.0;
    for (std::size_t c = 0; c < pool.size(); ++c) {
      if (taken[c]) continue;
      const double diversity = step == 0 ? 1.0 : distance_sum[c] / static_cast<double>(step);
      const double value = (1.0 - lambda) * relevance[c] + lambda * diversity;
      if (best == pool.size() || value > best_value) {
        best = c;
        best_value = value;
      }
    }
    taken[best] = 1;
    out.items.push_back(pool[best]);
    const GenreMask chosen = catalog.mask(pool[best].item);
    for (std::size_t c = 0; c < pool.size(); ++c) {
      if (!taken[c]) distance_sum[c] += jaccard_distance(catalog.mask(pool[c].item), chosen);
    }
  }
  return out;
}

void write_recommendations(std::ostream& out, const RankedList& list, const IdMap& users,
                           const IdMap& items) {
  const auto old_precision = out.precision(10);
  for (std::size_t rank = 0; rank < list.items.size(); ++rank) {
    out << users.external(list.user) << ' ' << items.external(list.items[rank].item) << ' '
        << rank + 1 << ' ' << list.items[rank].score << '\n';
  }
  out.precision(old_precision);
}

}  // namespace nemf
