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
#include <cmath>

#include "fixtures.hpp"
#include "nemf/errors.hpp"
#include "nemf/metrics.hpp"

using namespace nemf;

namespace {

constexpr GenreMask bit(int g) { return GenreMask{1} << g; }

RankedList list_of(std::vector<std::uint32_t> items, std::size_t requested = 0,
                   std::uint32_t user = 0) {
  RankedList l{user, requested ? requested : items.size(), {}};
  for (auto i : items) l.items.push_back({i, 0.0});
  return l;
}

// One user, E[0, i] = weights[i].
SideMatrix explain_row(std::vector<double> weights) {
  std::vector<SideEntry> row;
  for (std::uint32_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0) row.push_back({i, weights[i]});
  }
  return SideMatrix(1, weights.size(), {SideKind::kExplainUser, 10, 4, false}, {row});
}

ItemCatalog catalog_of(std::vector<GenreMask> masks) {
  std::vector<std::int64_t> ids;
  std::vector<std::string> titles;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    ids.push_back(static_cast<std::int64_t>(i));
    titles.push_back("t");
  }
  return ItemCatalog({"a", "b", "c"}, ids, masks, titles);
}

}  // namespace

TEST_CASE("rank discount") {
  CHECK(rank_discount(1) == 1.0);
  CHECK(rank_discount(2) == 1.0);
  CHECK(rank_discount(4) == 0.5);
  CHECK(rank_discount(3) == doctest::Approx(1.0 / std::log2(3.0)));
  const std::vector<double> g{1.0, 1.0, 1.0};
  CHECK(discounted_gain(g) == doctest::Approx(2.0 + 1.0 / std::log2(3.0)));
}

TEST_CASE("precision") {
  const RelevantSet rel{1, 2, 3};
  CHECK(precision_at_n(list_of({1, 2, 3}), rel) == 1.0);
  CHECK(precision_at_n(list_of({4, 5, 6}), rel) == 0.0);
  CHECK(precision_at_n(list_of({1, 4, 5, 6, 7, 8, 9, 10, 2, 3}), rel) ==
        doctest::Approx(0.3));
  // truncated list still divides by N
  CHECK(precision_at_n(list_of({1, 2}, 10), rel) == doctest::Approx(0.2));
  CHECK(precision_at_n(list_of({}, 0), rel) == 0.0);
}

TEST_CASE("accuracy nDCG") {
  const RelevantSet one{7};
  CHECK(accuracy_ndcg(list_of({7, 1}), one) == 1.0);
  // rank 2 carries discount 1 as well
  CHECK(accuracy_ndcg(list_of({1, 7}), one) == 1.0);
  CHECK(accuracy_ndcg(list_of({1, 2, 7}), one) == doctest::Approx(1.0 / std::log2(3.0)));
  CHECK(accuracy_ndcg(list_of({1, 2}), RelevantSet{}) == 0.0);
  CHECK(accuracy_ndcg(list_of({1, 2}), RelevantSet{5}) == 0.0);
  // two relevant of three listed: (1 + 1/log2 3) / (1 + 1)
  CHECK(accuracy_ndcg(list_of({4, 1, 5}), RelevantSet{4, 5}) ==
        doctest::Approx((1.0 + 1.0 / std::log2(3.0)) / 2.0));
  // more relevant than N: ideal fills the whole list
  CHECK(accuracy_ndcg(list_of({1, 2}), RelevantSet{1, 2, 3, 4}) == 1.0);
}

TEST_CASE("mean explainability precision") {
  const auto e = explain_row({0, 12, 0, 30, 4});
  CHECK(mep(list_of({1, 3}), e) == 1.0);
  CHECK(mep(list_of({0, 2}), e) == 0.0);
  CHECK(mep(list_of({0, 1, 2, 3}), e) == 0.5);
  const std::vector<RankedList> lists{list_of({1, 3}), list_of({0, 2})};
  CHECK(mep(lists, e) == 0.5);
  CHECK(mep(std::span<const RankedList>{}, e) == 0.0);
  // threshold is strict
  CHECK(mep(list_of({1, 3, 4}), e, 12.0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("explainability nDCG") {
  const ExplainConfig cfg;  // E_max = 50
  const RatingScale scale;
  CHECK(e_ndcg(list_of({0, 1}), explain_row({50, 50}), cfg, scale) == 1.0);
  CHECK(e_ndcg(list_of({0, 1}), explain_row({0, 0}), cfg, scale) == 0.0);
  // (25 + 50) / (50 + 50)
  CHECK(e_ndcg(list_of({0, 1}), explain_row({25, 50}), cfg, scale) == doctest::Approx(0.75));
  const double d3 = 1.0 / std::log2(3.0);
  CHECK(e_ndcg(list_of({0, 1, 2}), explain_row({50, 0, 20}), cfg, scale) ==
        doctest::Approx((50.0 + 20.0 * d3) / (100.0 + 50.0 * d3)));
  // missing positions count as zero gain
  CHECK(e_ndcg(list_of({0}, 2), explain_row({50}), cfg, scale) == doctest::Approx(0.5));
}

TEST_CASE("novelty nDCG and list novelty") {
  // user 0 has seen only item 0 (genre a)
  const auto cat = catalog_of({bit(0), bit(0), bit(1), bit(0) | bit(1)});
  const RatingMatrix train(1, 4, {{0, 0, 5}});
  const NoveltyModel nov(train, cat, NoveltyKind::kDistance);
  CHECK(n_ndcg(list_of({2}), nov) == 1.0);
  CHECK(n_ndcg(list_of({1}), nov) == 0.0);
  const double d3 = 1.0 / std::log2(3.0);
  CHECK(n_ndcg(list_of({2, 3, 1}), nov) == doctest::Approx(1.5 / (2.0 + d3)));
  CHECK(list_novelty(list_of({2, 3, 1}), nov) == doctest::Approx(0.5));
  CHECK(list_novelty(list_of({}), nov) == 0.0);

  const RatingMatrix pop_train(4, 4, {{0, 0, 5}, {1, 0, 4}, {2, 1, 3}});
  const NoveltyModel pop(pop_train, cat, NoveltyKind::kPopularity);
  // unrated items sit at N_max = log2 4
  CHECK(n_ndcg(list_of({2, 3}), pop) == 1.0);
  CHECK(n_ndcg(list_of({0, 1}), pop) == doctest::Approx((1.0 + 2.0) / 4.0));
}

TEST_CASE("paired t-test") {
  const std::vector<double> a{0.1102, 0.1207, 0.1050, 0.1153};
  const std::vector<double> b{0.1001, 0.1121, 0.1012, 0.1098};
  // scipy.stats.ttest_rel
  CHECK(paired_t_test(a, b) == doctest::Approx(0.01642191045070228).epsilon(1e-10));
  CHECK(paired_t_test(b, a) == doctest::Approx(0.01642191045070228).epsilon(1e-10));
  const std::vector<double> c{1.0, 2.0, 3.0, 4.0}, d{1.5, 1.0, 3.5, 2.0};
  CHECK(paired_t_test(c, d) == doctest::Approx(0.4740213884950637).epsilon(1e-10));
  CHECK(paired_t_test(a, a) == 1.0);
  const std::vector<double> shifted{0.2102, 0.2207, 0.2050, 0.2153};
  CHECK(paired_t_test(shifted, a) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(paired_t_test(a, std::vector<double>{1.0}), ConfigError);
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0}, std::vector<double>{2.0}),
                  ConfigError);
}

TEST_CASE("metric properties on random lists") {
  nemf::Rng rng(21);
  const std::size_t n_items = 60;
  const auto cat = testing::random_catalog(2, n_items, 8);
  const auto train = testing::random_matrix(4, 5, n_items, 0.2);
  const NoveltyModel nov(train, cat, NoveltyKind::kDistance);
  const NoveltyModel pop(train, cat, NoveltyKind::kPopularity);
  const ExplainConfig cfg;
  for (int t = 0; t < 300; ++t) {
    std::vector<double> w(n_items);
    for (auto& x : w) x = uniform_unit(rng) < 0.5 ? 0.0 : 4.0 * (1 + uniform_index(rng, 12));
    const auto e = explain_row(w);
    std::vector<std::uint32_t> idx(n_items);
    for (std::uint32_t i = 0; i < n_items; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto list = list_of({idx.begin(), idx.begin() + 10});
    RelevantSet rel(idx.begin() + 5, idx.begin() + 25);

    for (double v : {precision_at_n(list, rel), accuracy_ndcg(list, rel), mep(list, e),
                     e_ndcg(list, e, cfg, RatingScale{}), n_ndcg(list, nov), n_ndcg(list, pop)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }

    // order does not matter for set metrics
    auto shuffled = list;
    std::shuffle(shuffled.items.begin(), shuffled.items.end(), rng);
    CHECK(precision_at_n(shuffled, rel) == precision_at_n(list, rel));
    CHECK(mep(shuffled, e) == mep(list, e));

    // moving the larger gain forward never lowers nDCG
    auto sorted = list;
    std::stable_sort(sorted.items.begin(), sorted.items.end(),
                     [&](const ScoredItem& x, const ScoredItem& y) {
                       return e.at(0, x.item) > e.at(0, y.item);
                     });
    CHECK(e_ndcg(sorted, e, cfg, RatingScale{}) >= e_ndcg(list, e, cfg, RatingScale{}) - 1e-12);
    auto by_rel = list;
    std::stable_partition(by_rel.items.begin(), by_rel.items.end(),
                          [&](const ScoredItem& x) { return rel.count(x.item) > 0; });
    CHECK(accuracy_ndcg(by_rel, rel) >= accuracy_ndcg(list, rel) - 1e-12);

    // MEP is non-increasing in the threshold
    double prev = 1.0;
    for (double theta : {0.0, 4.0, 12.0, 24.0, 48.0}) {
      const double m = mep(list, e, theta);
      CHECK(m <= prev);
      prev = m;
    }
  }
}

TEST_CASE("relevant items come from the probe set") {
  const RatingMatrix probe(2, 5, {{0, 1, 5}, {0, 2, 3}, {0, 4, 4}, {1, 0, 5}});
  const auto rel = relevant_items(probe, 0, 4);
  CHECK(rel == RelevantSet{1, 4});
  CHECK(relevant_items(probe, 0, 1).size() == 3);
}
