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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nemf {

struct RatingScale {
  int min = 1;
  int max = 5;

  bool contains(int r) const { return r >= min && r <= max; }
  void validate() const;
  friend bool operator==(const RatingScale&, const RatingScale&) = default;
};

// One line of a ratings file, still in external ids.
struct RatingRecord {
  std::int64_t user_id = 0;
  std::int64_t item_id = 0;
  int rating = 0;
  std::int64_t timestamp = 0;  // parsed, never used by the algorithms
  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

enum class DatasetFormat { kMl100k, kMl1m };

DatasetFormat parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat format);

// `user \t item \t rating \t timestamp`
std::vector<RatingRecord> parse_ml100k_ratings(const std::filesystem::path& path,
                                               RatingScale scale = {});
// `user::item::rating::timestamp`
std::vector<RatingRecord> parse_ml1m_ratings(const std::filesystem::path& path,
                                             RatingScale scale = {});

// Internal (dense index) rating triplet.
struct Rating {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  int value = 0;
  friend bool operator==(const Rating&, const Rating&) = default;
};

// Row/column entry: the other axis' index plus the rating.
struct RatingEntry {
  std::uint32_t index = 0;
  int value = 0;
};

// Immutable sparse rating store with user-row and item-column access.
//
// Triplets keep their construction order ("record order"); fold specs refer
// to records by that position. Rows are sorted by item index, columns by
// user index.
class RatingMatrix {
 public:
  RatingMatrix() = default;
  // Throws ValidationError on out-of-range indices, ratings outside `scale`
  // or duplicated (user, item) pairs.
  RatingMatrix(std::size_t n_users, std::size_t n_items,
               std::vector<Rating> triplets, RatingScale scale = {});

  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }
  std::size_t size() const { return triplets_.size(); }
  RatingScale scale() const { return scale_; }

  std::span<const Rating> triplets() const { return triplets_; }
  std::span<const RatingEntry> user_row(std::uint32_t u) const;
  std::span<const RatingEntry> item_column(std::uint32_t i) const;

  // Mean of the stored ratings; 0 for an empty row/column.
  double user_mean(std::uint32_t u) const;
  double item_mean(std::uint32_t i) const;

  std::optional<int> rating(std::uint32_t u, std::uint32_t i) const;
  bool contains(std::uint32_t u, std::uint32_t i) const {
    return rating(u, i).has_value();
  }

  // Same index space, only the given record positions.
  RatingMatrix subset(std::span<const std::size_t> records) const;

 private:
  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  RatingScale scale_{};
  std::vector<Rating> triplets_;
  std::vector<std::size_t> row_ptr_, col_ptr_;
  std::vector<RatingEntry> rows_, cols_;
  std::vector<double> user_means_, item_means_;
};

// Bidirectional external <-> internal id map. Internal ids follow ascending
// external id order.
class IdMap {
 public:
  IdMap() = default;
  explicit IdMap(std::vector<std::int64_t> sorted_external);

  std::size_t size() const { return external_.size(); }
  std::int64_t external(std::uint32_t internal) const;
  std::uint32_t internal(std::int64_t external) const;  // LookupError
  std::optional<std::uint32_t> find(std::int64_t external) const;
  std::span<const std::int64_t> externals() const { return external_; }

 private:
  std::vector<std::int64_t> external_;
  std::unordered_map<std::int64_t, std::uint32_t> internal_;
};

struct IndexedRatings {
  RatingMatrix matrix;
  IdMap users;
  IdMap items;
};

// Dense, deterministic re-indexing. Matrix record order equals input order.
IndexedRatings reindex(std::span<const RatingRecord> records,
                       RatingScale scale = {});

using GenreMask = std::uint64_t;

// Item -> genre set. Every item carries at least one genre; items without
// any flag get the "unknown" genre.
class ItemCatalog {
 public:
  static constexpr std::size_t kMaxGenres = 64;
  static constexpr std::string_view kUnknownGenre = "unknown";

  ItemCatalog() = default;
  ItemCatalog(std::vector<std::string> genres,
              std::vector<std::int64_t> item_ids, std::vector<GenreMask> masks,
              std::vector<std::string> titles);

  std::size_t size() const { return masks_.size(); }
  std::size_t genre_count() const { return genres_.size(); }
  std::span<const std::string> genres() const { return genres_; }
  std::optional<std::size_t> genre_index(std::string_view name) const;

  GenreMask mask(std::size_t pos) const;  // LookupError
  const std::string& title(std::size_t pos) const;
  std::int64_t item_id(std::size_t pos) const;
  std::optional<std::size_t> find(std::int64_t item_id) const;

  double average_genres_per_item() const;

  // Re-ordered copy where position == internal item index of `items`.
  // Throws LookupError for a rated item missing from the catalog.
  ItemCatalog aligned_to(const IdMap& items) const;

 private:
  std::vector<std::string> genres_;
  std::vector<std::int64_t> item_ids_;
  std::vector<GenreMask> masks_;
  std::vector<std::string> titles_;
  std::unordered_map<std::int64_t, std::size_t> index_;
};

ItemCatalog parse_items(const std::filesystem::path& path, DatasetFormat format);

// Canonical ratings/items file names inside a dataset directory.
std::filesystem::path ratings_file(const std::filesystem::path& dir,
                                   DatasetFormat format);
std::filesystem::path items_file(const std::filesystem::path& dir,
                                 DatasetFormat format);

// Everything an experiment needs from disk, already indexed.
struct Dataset {
  std::vector<RatingRecord> records;
  IndexedRatings ratings;
  ItemCatalog catalog;  // aligned to ratings.items
  DatasetFormat format = DatasetFormat::kMl100k;
};

Dataset load_dataset(const std::filesystem::path& dir, DatasetFormat format,
                     RatingScale scale = {});

struct Fold {
  std::vector<std::size_t> train;  // ascending record positions
  std::vector<std::size_t> probe;
};

struct FoldSpec {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
};

// Per-user stratified k-fold split. Each user's records are shuffled with a
// seeded generator and dealt round-robin to the folds; users with fewer than
// k ratings stay in every training split and never appear in a probe split.
FoldSpec kfold_split(const RatingMatrix& matrix, int k, std::uint64_t seed);

}  // namespace nemf
