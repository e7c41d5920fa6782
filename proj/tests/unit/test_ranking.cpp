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
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "nemf/errors.hpp"
#include "nemf/novelty.hpp"
#include "nemf/ranking.hpp"

using namespace nemf;

namespace {

constexpr GenreMask bit(int g) { return GenreMask{1} << g; }

ItemCatalog catalog_of(std::vector<GenreMask> masks, std::size_t n_genres = 4) {
  std::vector<std::string> genres;
  for (std::size_t g = 0; g < n_genres; ++g) genres.push_back("g" + std::to_string(g));
  std::vector<std::int64_t> ids;
  std::vector<std::string> titles;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    ids.push_back(static_cast<std::int64_t>(i));
    titles.push_back("t");
  }
  return ItemCatalog(genres, ids, masks, titles);
}

// One factor: predict(u, i) = user[u] * item[i].
FactorModel scalar_model(std::vector<double> users, std::vector<double> items) {
  TrainConfig cfg;
  cfg.factors = 1;
  FactorModel m(users.size(), items.size(), cfg);
  for (std::uint32_t u = 0; u < users.size(); ++u) m.user(u)[0] = users[u];
  for (std::uint32_t i = 0; i < items.size(); ++i) m.item(i)[0] = items[i];
  return m;
}

RankedList candidates(std::vector<double> scores) {
  RankedList l{0, scores.size(), {}};
  for (std::uint32_t i = 0; i < scores.size(); ++i) l.items.push_back({i, scores[i]});
  return l;
}

// Direct transcription of the greedy selection rule.
std::vector<std::uint32_t> brute_mmr(const RankedList& pool, const ItemCatalog& cat,
                                     std::size_t n, double lambda) {
  double lo = pool.items[0].score, hi = lo;
  for (const auto& s : pool.items) {
    lo = std::min(lo, s.score);
    hi = std::max(hi, s.score);
  }
  std::vector<std::uint32_t> chosen;
  std::set<std::size_t> used;
  while (chosen.size() < std::min(n, pool.items.size())) {
    std::size_t best = 0;
    double best_v = -1e300;
    for (std::size_t c = 0; c < pool.items.size(); ++c) {
      if (used.count(c)) continue;
      const double rel = hi > lo ? (pool.items[c].score - lo) / (hi - lo) : 0.5;
      double div = 1.0;
      if (!chosen.empty()) {
        div = 0.0;
        for (auto j : chosen) div += jaccard_distance(cat.mask(pool.items[c].item), cat.mask(j));
        div /= static_cast<double>(chosen.size());
      }
      const double v = (1 - lambda) * rel + lambda * div;
      if (v > best_v) {
        best_v = v;
        best = c;
      }
    }
    used.insert(best);
    chosen.push_back(pool.items[best].item);
  }
  return chosen;
}

std::vector<std::uint32_t> items_of(const RankedList& l) {
  std::vector<std::uint32_t> out;
  for (const auto& s : l.items) out.push_back(s.item);
  return out;
}

}  // namespace

TEST_CASE("top-N of one is the argmax over unrated items") {
  const auto model = scalar_model({1.0}, {0.3, 0.9, 0.1, 0.7});
  RatingMatrix train(1, 4, {{0, 1, 5}});
  const auto l = top_n(model, train, 0, 1);
  REQUIRE(l.items.size() == 1);
  CHECK(l.items[0].item == 3);
  CHECK(l.items[0].score == doctest::Approx(0.7));
}

TEST_CASE("top-N hand ranked") {
  // user 0 rated item 2; user 1 rated nothing; user 2 rated everything
  const auto model = scalar_model({1.0, -1.0, 2.0}, {0.5, 0.2, 0.9, 0.2});
  RatingMatrix train(3, 4, {{0, 2, 3}, {2, 0, 1}, {2, 1, 2}, {2, 2, 3}, {2, 3, 4}});
  CHECK(items_of(top_n(model, train, 0, 3)) == std::vector<std::uint32_t>{0, 1, 3});
  // negated scores, ties by item index
  CHECK(items_of(top_n(model, train, 1, 4)) == std::vector<std::uint32_t>{1, 3, 0, 2});
  const auto none = top_n(model, train, 2, 3);
  CHECK(none.items.empty());
  CHECK(none.requested == 3);
  CHECK(none.truncated());
}

TEST_CASE("top-N truncates when candidates run out") {
  const auto model = scalar_model({1.0}, {0.1, 0.2, 0.3});
  RatingMatrix train(1, 3, {{0, 0, 4}});
  const auto l = top_n(model, train, 0, 10);
  CHECK(l.items.size() == 2);
  CHECK(l.requested == 10);
  CHECK(l.truncated());
}

TEST_CASE("top-N never lists training items") {
  const auto m = testing::random_matrix(7, 30, 60, 0.2);
  const auto model = init_model(TrainConfig{}, 30, 60);
  for (std::uint32_t u = 0; u < 30; ++u) {
    const auto l = top_n(model, m, u, 10);
    std::set<std::uint32_t> seen;
    for (std::size_t r = 0; r < l.items.size(); ++r) {
      CHECK_FALSE(m.rating(u, l.items[r].item).has_value());
      CHECK(seen.insert(l.items[r].item).second);
      if (r > 0) CHECK(l.items[r - 1].score >= l.items[r].score);
    }
  }
}

TEST_CASE("top-N argument errors") {
  const auto model = scalar_model({1.0}, {0.1, 0.2});
  CHECK_THROWS_AS(top_n(model, RatingMatrix(1, 2, {}), 3, 1), LookupError);
  CHECK_THROWS_AS(top_n(model, RatingMatrix(1, 3, {}), 0, 1), ConfigError);
}

TEST_CASE("MMR with zero trade-off keeps the relevance order") {
  const auto cat = catalog_of({bit(0), bit(0), bit(1), bit(2), bit(0) | bit(1)});
  const auto pool = candidates({0.9, 0.8, 0.7, 0.6, 0.5});
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto l = mmr_rerank(pool, cat, n, 0.0);
    CHECK(l.requested == n);
    CHECK(l.items == std::vector<ScoredItem>(pool.items.begin(), pool.items.begin() + n));
  }
}

TEST_CASE("MMR with full trade-off and identical genres keeps candidate order") {
  const auto cat = catalog_of({bit(1), bit(1), bit(1), bit(1)});
  const auto pool = candidates({0.1, 0.9, 0.4, 0.7});
  CHECK(items_of(mmr_rerank(pool, cat, 4, 1.0)) == std::vector<std::uint32_t>{0, 1, 2, 3});
}

TEST_CASE("MMR diversifies") {
  // items 0 and 1 share genres; 2 is disjoint and slightly less relevant
  const auto cat = catalog_of({bit(0), bit(0), bit(1)});
  const auto pool = candidates({1.0, 0.95, 0.9});
  CHECK(items_of(mmr_rerank(pool, cat, 2, 0.0)) == std::vector<std::uint32_t>{0, 1});
  CHECK(items_of(mmr_rerank(pool, cat, 2, 0.5)) == std::vector<std::uint32_t>{0, 2});
}

TEST_CASE("MMR matches the greedy rule on small pools") {
  nemf::Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    std::vector<GenreMask> masks;
    std::vector<double> scores;
    for (int i = 0; i < 5; ++i) {
      masks.push_back((rng() & 3) | 1);
      scores.push_back(static_cast<double>(rng() % 1000) / 1000.0);
    }
    const auto cat = catalog_of(masks, 2);
    const auto pool = candidates(scores);
    const double lambda = static_cast<double>(t % 11) / 10.0;
    const std::size_t n = 1 + static_cast<std::size_t>(t % 5);
    CHECK(items_of(mmr_rerank(pool, cat, n, lambda)) == brute_mmr(pool, cat, n, lambda));
  }
}

TEST_CASE("MMR output is a subset of the pool without repeats") {
  const auto cat = testing::random_catalog(5, 100, 18);
  nemf::Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    RankedList pool{0, 100, {}};
    std::vector<std::uint32_t> idx(100);
    for (std::uint32_t i = 0; i < 100; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::uint32_t i = 0; i < 40; ++i) {
      pool.items.push_back({idx[i], static_cast<double>(rng() % 1000)});
    }
    const auto l = mmr_rerank(pool, cat, 10, 0.5);
    CHECK(l.items.size() == 10);
    const auto listed = items_of(l);
    const std::set<std::uint32_t> got(listed.begin(), listed.end());
    CHECK(got.size() == 10);
    for (auto i : got) {
      CHECK(std::find(idx.begin(), idx.begin() + 40, i) != idx.begin() + 40);
    }
    CHECK(mmr_rerank(pool, cat, 10, 0.5) == l);
  }
}

TEST_CASE("MMR short pool and argument errors") {
  const auto cat = catalog_of({bit(0), bit(1)});
  const auto l = mmr_rerank(candidates({0.5, 0.2}), cat, 5, 0.5);
  CHECK(l.items.size() == 2);
  CHECK(l.truncated());
  CHECK(mmr_rerank(candidates({}), cat, 3, 0.5).items.empty());
  CHECK_THROWS_AS(mmr_rerank(candidates({0.1}), cat, 1, -0.1), ConfigError);
  CHECK_THROWS_AS(mmr_rerank(candidates({0.1}), cat, 1, 1.5), ConfigError);
}

TEST_CASE("recommendation output uses external ids") {
  const IdMap users({196}), items({10, 20, 30});
  RankedList l{0, 2, {{2, 4.25}, {0, 3.5}}};
  std::ostringstream out;
  write_recommendations(out, l, users, items);
  CHECK(out.str() == "196 30 1 4.25\n196 10 2 3.5\n");
}
