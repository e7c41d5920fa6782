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
#include <bit>
#include <set>

#include "fixtures.hpp"
#include "nemf/dataset.hpp"
#include "nemf/errors.hpp"

using namespace nemf;
using nemf::testing::TempDir;
using nemf::testing::write_file;

namespace {

const std::string kFlags18 = "0|0|0|0|0|0|0|0|0|0|0|0|0|0|0|0|0|0";

}  // namespace

TEST_CASE("ml100k rating line") {
  TempDir dir;
  write_file(dir / "u.data", "196\t242\t3\t881250949\n");
  const auto records = parse_ml100k_ratings(dir / "u.data");
  REQUIRE(records.size() == 1);
  CHECK(records[0] == RatingRecord{196, 242, 3, 881250949});
}

TEST_CASE("empty ratings file gives no records") {
  TempDir dir;
  write_file(dir / "u.data", "");
  CHECK(parse_ml100k_ratings(dir / "u.data").empty());
  write_file(dir / "ratings.dat", "\n\n");
  CHECK(parse_ml1m_ratings(dir / "ratings.dat").empty());
}

TEST_CASE("ml1m rating line") {
  TempDir dir;
  write_file(dir / "ratings.dat", "1::1193::5::978300760\r\n");
  const auto records = parse_ml1m_ratings(dir / "ratings.dat");
  REQUIRE(records.size() == 1);
  CHECK(records[0] == RatingRecord{1, 1193, 5, 978300760});
}

TEST_CASE("garbage line reports its line number") {
  TempDir dir;
  write_file(dir / "ratings.dat", "1::1193::5::978300760\nUserID::MovieID::Rating::Timestamp\n");
  try {
    parse_ml1m_ratings(dir / "ratings.dat");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  write_file(dir / "u.data", "1\t2\t3\n");
  CHECK_THROWS_AS(parse_ml100k_ratings(dir / "u.data"), ParseError);
  CHECK_THROWS_AS(parse_ml100k_ratings(dir / "missing.data"), ParseError);
}

TEST_CASE("rating outside the scale is a validation error") {
  TempDir dir;
  write_file(dir / "u.data", "1\t2\t6\t0\n");
  CHECK_THROWS_AS(parse_ml100k_ratings(dir / "u.data"), ValidationError);
  CHECK_NOTHROW(parse_ml100k_ratings(dir / "u.data", RatingScale{1, 10}));
}

TEST_CASE("u.item genre flags") {
  TempDir dir;
  write_file(dir / "u.item",
             "1|Toy Story (1995)|01-Jan-1995||http://x|0|0|1|0|0|0|0|0|0|0|0|0|0|0|0|0|0|0|0\n"
             "2|Nothing (1990)|||" "|0|" + kFlags18 + "\n");
  const auto catalog = parse_items(dir / "u.item", DatasetFormat::kMl100k);
  REQUIRE(catalog.size() == 2);
  CHECK(catalog.genre_count() == 19);
  CHECK(catalog.mask(0) == GenreMask{1} << 2);
  CHECK(catalog.genres()[2] == "Adventure");
  // all-zero flags fall back to "unknown"
  CHECK(catalog.mask(1) == GenreMask{1});
  CHECK(catalog.genres()[0] == "unknown");
  CHECK(catalog.title(0) == "Toy Story (1995)");
}

TEST_CASE("movies.dat genres") {
  TempDir dir;
  write_file(dir / "movies.dat",
             "1::Toy Story (1995)::Animation|Children's|Comedy\n"
             "2::Jumanji (1995)::Adventure|Children's|Fantasy\n");
  const auto catalog = parse_items(dir / "movies.dat", DatasetFormat::kMl1m);
  CHECK(catalog.genre_count() == 18);
  CHECK(std::popcount(catalog.mask(0)) == 3);
  CHECK(catalog.mask(0) == ((GenreMask{1} << *catalog.genre_index("Animation")) |
                            (GenreMask{1} << *catalog.genre_index("Children's")) |
                            (GenreMask{1} << *catalog.genre_index("Comedy"))));
  CHECK(catalog.title(1) == "Jumanji (1995)");
}

TEST_CASE("movies.dat unknown genre is listed in the error") {
  TempDir dir;
  write_file(dir / "movies.dat", "1::Toy Story (1995)::Animation|Cyberpunk\n");
  try {
    parse_items(dir / "movies.dat", DatasetFormat::kMl1m);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("Cyberpunk") != std::string::npos);
  }
}

TEST_CASE("movies.dat item without genre gets unknown") {
  TempDir dir;
  write_file(dir / "movies.dat", "1::A::Drama\n2::B::\n");
  const auto catalog = parse_items(dir / "movies.dat", DatasetFormat::kMl1m);
  CHECK(catalog.genre_count() == 19);
  const auto unknown = catalog.genre_index("unknown");
  REQUIRE(unknown);
  CHECK(catalog.mask(1) == GenreMask{1} << *unknown);
}

TEST_CASE("reindex sorts external ids") {
  std::vector<RatingRecord> records = {{7, 100, 4, 0}, {3, 100, 2, 0}, {9, 50, 5, 0}};
  const auto indexed = reindex(records);
  CHECK(indexed.users.internal(3) == 0);
  CHECK(indexed.users.internal(7) == 1);
  CHECK(indexed.users.internal(9) == 2);
  CHECK(indexed.items.internal(50) == 0);
  CHECK(indexed.items.internal(100) == 1);
  CHECK_THROWS_AS(indexed.users.internal(4), LookupError);
  CHECK_FALSE(indexed.users.find(4).has_value());
  // round trip
  for (std::size_t k = 0; k < records.size(); ++k) {
    const Rating& r = indexed.matrix.triplets()[k];
    CHECK(indexed.users.external(r.user) == records[k].user_id);
    CHECK(indexed.items.external(r.item) == records[k].item_id);
    CHECK(r.value == records[k].rating);
  }
}

TEST_CASE("single record matrix") {
  const auto indexed = reindex(std::vector<RatingRecord>{{5, 6, 4, 0}});
  const auto& m = indexed.matrix;
  CHECK(m.n_users() == 1);
  CHECK(m.n_items() == 1);
  CHECK(m.user_mean(0) == 4.0);
  CHECK(m.item_mean(0) == 4.0);
  CHECK(m.rating(0, 0) == 4);
}

TEST_CASE("duplicate (user, item) pair is rejected") {
  std::vector<RatingRecord> records = {{1, 2, 4, 0}, {1, 2, 5, 1}};
  CHECK_THROWS_AS(reindex(records), ValidationError);
  CHECK_THROWS_AS(RatingMatrix(2, 2, {{0, 0, 1}, {0, 0, 2}}), ValidationError);
  CHECK_THROWS_AS(RatingMatrix(2, 2, {{2, 0, 1}}), ValidationError);
  CHECK_THROWS_AS(RatingMatrix(2, 2, {{0, 0, 9}}), ValidationError);
}

TEST_CASE("rows and columns are sorted and means cached") {
  RatingMatrix m(3, 3, {{2, 1, 5}, {0, 2, 1}, {0, 0, 3}, {2, 0, 4}});
  const auto row = m.user_row(0);
  REQUIRE(row.size() == 2);
  CHECK(row[0].index == 0);
  CHECK(row[1].index == 2);
  CHECK(m.user_mean(0) == 2.0);
  CHECK(m.user_mean(1) == 0.0);
  const auto col = m.item_column(0);
  REQUIRE(col.size() == 2);
  CHECK(col[0].index == 0);
  CHECK(col[1].index == 2);
  CHECK(m.item_mean(0) == 3.5);
  CHECK_FALSE(m.contains(1, 1));
  CHECK_THROWS_AS(m.user_row(3), LookupError);
}

TEST_CASE("kfold split partitions every fold") {
  const auto m = nemf::testing::random_matrix(3, 60, 80, 0.2);
  const auto folds = kfold_split(m, 4, 17);
  REQUIRE(folds.folds.size() == 4);
  std::vector<int> probe_count(m.size(), 0);
  for (const auto& fold : folds.folds) {
    CHECK(fold.train.size() + fold.probe.size() == m.size());
    std::vector<std::size_t> all = fold.train;
    all.insert(all.end(), fold.probe.begin(), fold.probe.end());
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(all.back() == m.size() - 1);
    CHECK(std::is_sorted(fold.train.begin(), fold.train.end()));
    for (auto p : fold.probe) ++probe_count[p];
  }
  // every record of a user with >= k ratings is probed exactly once
  for (std::size_t p = 0; p < m.size(); ++p) {
    const auto u = m.triplets()[p].user;
    CHECK(probe_count[p] == (m.user_row(u).size() >= 4 ? 1 : 0));
  }
}

TEST_CASE("kfold split is stratified per user") {
  const auto m = nemf::testing::random_matrix(5, 40, 100, 0.3);
  const auto folds = kfold_split(m, 4, 1);
  for (const auto& fold : folds.folds) {
    std::vector<int> per_user(m.n_users(), 0);
    for (auto p : fold.probe) ++per_user[m.triplets()[p].user];
    for (std::uint32_t u = 0; u < m.n_users(); ++u) {
      const auto n = m.user_row(u).size();
      CHECK(per_user[u] >= static_cast<int>(n / 4));
      CHECK(per_user[u] <= static_cast<int>((n + 3) / 4));
    }
  }
}

TEST_CASE("kfold split determinism and degenerate users") {
  RatingMatrix m(2, 6, {{0, 0, 5}, {0, 1, 4}, {1, 0, 3}, {1, 1, 3}, {1, 2, 1}, {1, 3, 2}, {1, 4, 2}});
  const auto a = kfold_split(m, 4, 99);
  const auto b = kfold_split(m, 4, 99);
  for (int f = 0; f < 4; ++f) {
    CHECK(a.folds[f].train == b.folds[f].train);
    CHECK(a.folds[f].probe == b.folds[f].probe);
    // user 0 has 2 ratings: always train
    CHECK(std::count(a.folds[f].train.begin(), a.folds[f].train.end(), 0u) == 1);
    CHECK(std::count(a.folds[f].train.begin(), a.folds[f].train.end(), 1u) == 1);
  }
  CHECK_THROWS_AS(kfold_split(m, 1, 0), ConfigError);
}

TEST_CASE("catalog alignment follows the internal item order") {
  ItemCatalog catalog({"a", "b"}, {10, 20, 30}, {1, 2, 3}, {"x", "y", "z"});
  const IdMap items({20, 30});
  const auto aligned = catalog.aligned_to(items);
  CHECK(aligned.size() == 2);
  CHECK(aligned.mask(0) == 2);
  CHECK(aligned.item_id(1) == 30);
  CHECK(aligned.title(1) == "z");
  CHECK_THROWS_AS(catalog.aligned_to(IdMap({20, 40})), LookupError);
  CHECK_THROWS_AS(ItemCatalog({"a"}, {1}, {0}, {"t"}), ValidationError);
  CHECK_THROWS_AS(ItemCatalog({"a"}, {1}, {2}, {"t"}), ValidationError);
  CHECK(catalog.average_genres_per_item() == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("dataset format names") {
  CHECK(parse_dataset_format("ml100k") == DatasetFormat::kMl100k);
  CHECK(parse_dataset_format("ml1m") == DatasetFormat::kMl1m);
  CHECK_THROWS_AS(parse_dataset_format("netflix"), ConfigError);
  CHECK(to_string(DatasetFormat::kMl1m) == "ml1m");
}

TEST_CASE("ML100K loads with the published shape" * doctest::skip(!nemf::testing::have_ml100k())) {
  const auto ds = load_dataset(nemf::testing::ml100k_dir(), DatasetFormat::kMl100k);
  CHECK(ds.records.size() == 100000);
  CHECK(ds.ratings.matrix.n_users() == 943);
  CHECK(ds.ratings.matrix.n_items() == 1682);
  CHECK(ds.catalog.size() == 1682);
  CHECK(ds.catalog.genre_count() == 19);
  CHECK(ds.records.front() == RatingRecord{196, 242, 3, 881250949});
  const auto folds = kfold_split(ds.ratings.matrix, 4, 2018);
  for (const auto& fold : folds.folds) {
    CHECK(fold.probe.size() > 24000);
    CHECK(fold.probe.size() < 26000);
  }
}
