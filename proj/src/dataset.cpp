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
#include "nemf/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nemf/errors.hpp"
#include "nemf/random.hpp"

namespace nemf {
namespace {

constexpr std::array<std::string_view, 19> kMl100kGenres = {
    "unknown",  "Action",  "Adventure", "Animation", "Children's",
    "Comedy",   "Crime",   "Documentary", "Drama",   "Fantasy",
    "Film-Noir", "Horror", "Musical",   "Mystery",   "Romance",
    "Sci-Fi",   "Thriller", "War",      "Western"};

constexpr std::array<std::string_view, 18> kMl1mGenres = {
    "Action",   "Adventure", "Animation", "Children's", "Comedy",
    "Crime",    "Documentary", "Drama",   "Fantasy",    "Film-Noir",
    "Horror",   "Musical",   "Mystery",   "Romance",    "Sci-Fi",
    "Thriller", "War",       "Western"};

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

void chomp(std::string& line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.pop_back();
  }
}

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

std::vector<std::string_view> split(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
}

template <class Int>
std::optional<Int> to_int(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  Int value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return value;
}

std::vector<RatingRecord> parse_ratings(const std::filesystem::path& path,
                                        std::string_view sep,
                                        RatingScale scale) {
  scale.validate();
  auto in = open_or_throw(path);
  std::vector<RatingRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (blank(line)) continue;
    const auto fields = split(line, sep);
    if (fields.size() != 4) {
      throw ParseError(where(path, line_no) + "expected 4 fields, got " +
                       std::to_string(fields.size()));
    }
    const auto user = to_int<std::int64_t>(fields[0]);
    const auto item = to_int<std::int64_t>(fields[1]);
    const auto rating = to_int<int>(fields[2]);
    const auto ts = to_int<std::int64_t>(fields[3]);
    if (!user || !item || !rating || !ts) {
      throw ParseError(where(path, line_no) + "non-integer field in '" + line +
                       "'");
    }
    if (!scale.contains(*rating)) {
      throw ValidationError(where(path, line_no) + "rating " +
                            std::to_string(*rating) + " outside [" +
                            std::to_string(scale.min) + "," +
                            std::to_string(scale.max) + "]");
    }
    records.push_back({*user, *item, *rating, *ts});
  }
  return records;
}

void build_axis(std::size_t n, std::span<const Rating> triplets, bool by_user,
                std::vector<std::size_t>& ptr, std::vector<RatingEntry>& entries,
                std::vector<double>& means) {
  ptr.assign(n + 1, 0);
  for (const Rating& r : triplets) ++ptr[(by_user ? r.user : r.item) + 1];
  std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
  entries.resize(triplets.size());
  std::vector<std::size_t> fill(ptr.begin(), ptr.end() - 1);
  for (const Rating& r : triplets) {
    const std::uint32_t key = by_user ? r.user : r.item;
    entries[fill[key]++] = {by_user ? r.item : r.user, r.value};
  }
  means.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    auto first = entries.begin() + static_cast<std::ptrdiff_t>(ptr[a]);
    auto last = entries.begin() + static_cast<std::ptrdiff_t>(ptr[a + 1]);
    std::sort(first, last, [](const RatingEntry& x, const RatingEntry& y) {
      return x.index < y.index;
    });
    if (first == last) continue;
    double sum = 0.0;
    for (auto it = first; it != last; ++it) sum += it->value;
    means[a] = sum / static_cast<double>(last - first);
  }
}

}  // namespace

void RatingScale::validate() const {
  if (!(min < max)) {
    throw ConfigError("rating scale requires min < max, got [" +
                      std::to_string(min) + "," + std::to_string(max) + "]");
  }
}

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "ml100k" || name == "ml-100k") return DatasetFormat::kMl100k;
  if (name == "ml1m" || name == "ml-1m") return DatasetFormat::kMl1m;
  throw ConfigError("unknown dataset format '" + std::string(name) +
                    "' (expected ml100k or ml1m)");
}

std::string_view to_string(DatasetFormat format) {
  return format == DatasetFormat::kMl100k ? "ml100k" : "ml1m";
}

std::vector<RatingRecord> parse_ml100k_ratings(const std::filesystem::path& path,
                                               RatingScale scale) {
  return parse_ratings(path, "\t", scale);
}

std::vector<RatingRecord> parse_ml1m_ratings(const std::filesystem::path& path,
                                             RatingScale scale) {
  return parse_ratings(path, "::", scale);
}

// ---------------------------------------------------------------------------
// RatingMatrix

RatingMatrix::RatingMatrix(std::size_t n_users, std::size_t n_items,
                           std::vector<Rating> triplets, RatingScale scale)
    : n_users_(n_users),
      n_items_(n_items),
      scale_(scale),
      triplets_(std::move(triplets)) {
  scale_.validate();
  for (const Rating& r : triplets_) {
    if (r.user >= n_users_ || r.item >= n_items_) {
      throw ValidationError("rating (" + std::to_string(r.user) + "," +
                            std::to_string(r.item) + ") outside " +
                            std::to_string(n_users_) + "x" +
                            std::to_string(n_items_) + " matrix");
    }
    if (!scale_.contains(r.value)) {
      throw ValidationError("rating value " + std::to_string(r.value) +
                            " outside scale");
    }
  }
  build_axis(n_users_, triplets_, true, row_ptr_, rows_, user_means_);
  build_axis(n_items_, triplets_, false, col_ptr_, cols_, item_means_);
  for (std::uint32_t u = 0; u < n_users_; ++u) {
    const auto row = user_row(u);
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k].index == row[k - 1].index) {
        throw ValidationError("duplicate rating for internal pair (" +
                              std::to_string(u) + "," +
                              std::to_string(row[k].index) + ")");
      }
    }
  }
}

std::span<const RatingEntry> RatingMatrix::user_row(std::uint32_t u) const {
  if (u >= n_users_) throw LookupError("user index " + std::to_string(u) + " out of range");
  return {rows_.data() + row_ptr_[u], row_ptr_[u + 1] - row_ptr_[u]};
}

std::span<const RatingEntry> RatingMatrix::item_column(std::uint32_t i) const {
  if (i >= n_items_) throw LookupError("item index " + std::to_string(i) + " out of range");
  return {cols_.data() + col_ptr_[i], col_ptr_[i + 1] - col_ptr_[i]};
}

double RatingMatrix::user_mean(std::uint32_t u) const {
  if (u >= n_users_) throw LookupError("user index " + std::to_string(u) + " out of range");
  return user_means_[u];
}

double RatingMatrix::item_mean(std::uint32_t i) const {
  if (i >= n_items_) throw LookupError("item index " + std::to_string(i) + " out of range");
  return item_means_[i];
}

std::optional<int> RatingMatrix::rating(std::uint32_t u, std::uint32_t i) const {
  const auto row = user_row(u);
  const auto it = std::lower_bound(
      row.begin(), row.end(), i,
      [](const RatingEntry& e, std::uint32_t key) { return e.index < key; });
  if (it == row.end() || it->index != i) return std::nullopt;
  return it->value;
}

RatingMatrix RatingMatrix::subset(std::span<const std::size_t> records) const {
  std::vector<Rating> picked;
  picked.reserve(records.size());
  for (std::size_t pos : records) {
    if (pos >= triplets_.size()) {
      throw LookupError("record position " + std::to_string(pos) + " out of range");
    }
    picked.push_back(triplets_[pos]);
  }
  return RatingMatrix(n_users_, n_items_, std::move(picked), scale_);
}

// ---------------------------------------------------------------------------
// IdMap / reindex

IdMap::IdMap(std::vector<std::int64_t> sorted_external)
    : external_(std::move(sorted_external)) {
  internal_.reserve(external_.size());
  for (std::size_t k = 0; k < external_.size(); ++k) {
    internal_.emplace(external_[k], static_cast<std::uint32_t>(k));
  }
}

std::int64_t IdMap::external(std::uint32_t internal) const {
  if (internal >= external_.size()) {
    throw LookupError("internal index " + std::to_string(internal) + " out of range");
  }
  return external_[internal];
}

std::optional<std::uint32_t> IdMap::find(std::int64_t external) const {
  const auto it = internal_.find(external);
  if (it == internal_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t IdMap::internal(std::int64_t external) const {
  if (auto idx = find(external)) return *idx;
  throw LookupError("unknown id " + std::to_string(external));
}

IndexedRatings reindex(std::span<const RatingRecord> records, RatingScale scale) {
  std::vector<std::int64_t> users, items;
  users.reserve(records.size());
  items.reserve(records.size());
  for (const auto& r : records) {
    users.push_back(r.user_id);
    items.push_back(r.item_id);
  }
  for (auto* ids : {&users, &items}) {
    std::sort(ids->begin(), ids->end());
    ids->erase(std::unique(ids->begin(), ids->end()), ids->end());
  }
  IndexedRatings out;
  out.users = IdMap(std::move(users));
  out.items = IdMap(std::move(items));
  std::vector<Rating> triplets;
  triplets.reserve(records.size());
  for (const auto& r : records) {
    triplets.push_back({out.users.internal(r.user_id),
                        out.items.internal(r.item_id), r.rating});
  }
  try {
    out.matrix = RatingMatrix(out.users.size(), out.items.size(),
                              std::move(triplets), scale);
  } catch (const ValidationError&) {
    // Re-scan to report the duplicate in external ids.
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    pairs.reserve(records.size());
    for (const auto& r : records) pairs.emplace_back(r.user_id, r.item_id);
    std::sort(pairs.begin(), pairs.end());
    const auto dup = std::adjacent_find(pairs.begin(), pairs.end());
    if (dup != pairs.end()) {
      throw ValidationError("duplicate rating for user " +
                            std::to_string(dup->first) + ", item " +
                            std::to_string(dup->second));
    }
    throw;
  }
  return out;
}

// ---------------------------------------------------------------------------
// ItemCatalog

ItemCatalog::ItemCatalog(std::vector<std::string> genres,
                         std::vector<std::int64_t> item_ids,
                         std::vector<GenreMask> masks,
                         std::vector<std::string> titles)
    : genres_(std::move(genres)),
      item_ids_(std::move(item_ids)),
      masks_(std::move(masks)),
      titles_(std::move(titles)) {
  if (genres_.size() > kMaxGenres) {
    throw ValidationError("at most 64 genres are supported");
  }
  if (item_ids_.size() != masks_.size() || titles_.size() != masks_.size()) {
    throw ValidationError("catalog columns have different lengths");
  }
  const GenreMask width =
      genres_.size() == kMaxGenres ? ~GenreMask{0}
                                   : (GenreMask{1} << genres_.size()) - 1;
  for (std::size_t k = 0; k < masks_.size(); ++k) {
    if (masks_[k] == 0 || (masks_[k] & ~width) != 0) {
      throw ValidationError("item " + std::to_string(item_ids_[k]) +
                            " has an empty or out-of-vocabulary genre mask");
    }
    if (!index_.emplace(item_ids_[k], k).second) {
      throw ValidationError("duplicate catalog item " + std::to_string(item_ids_[k]));
    }
  }
}

std::optional<std::size_t> ItemCatalog::genre_index(std::string_view name) const {
  for (std::size_t g = 0; g < genres_.size(); ++g) {
    if (genres_[g] == name) return g;
  }
  return std::nullopt;
}

GenreMask ItemCatalog::mask(std::size_t pos) const {
  if (pos >= masks_.size()) {
    throw LookupError("catalog position " + std::to_string(pos) + " out of range");
  }
  return masks_[pos];
}

const std::string& ItemCatalog::title(std::size_t pos) const {
  if (pos >= titles_.size()) {
    throw LookupError("catalog position " + std::to_string(pos) + " out of range");
  }
  return titles_[pos];
}

std::int64_t ItemCatalog::item_id(std::size_t pos) const {
  if (pos >= item_ids_.size()) {
    throw LookupError("catalog position " + std::to_string(pos) + " out of range");
  }
  return item_ids_[pos];
}

std::optional<std::size_t> ItemCatalog::find(std::int64_t item_id) const {
  const auto it = index_.find(item_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double ItemCatalog::average_genres_per_item() const {
  if (masks_.empty()) return 0.0;
  std::size_t total = 0;
  for (GenreMask m : masks_) total += static_cast<std::size_t>(std::popcount(m));
  return static_cast<double>(total) / static_cast<double>(masks_.size());
}

ItemCatalog ItemCatalog::aligned_to(const IdMap& items) const {
  std::vector<std::int64_t> ids;
  std::vector<GenreMask> masks;
  std::vector<std::string> titles;
  ids.reserve(items.size());
  masks.reserve(items.size());
  titles.reserve(items.size());
  for (std::int64_t id : items.externals()) {
    const auto pos = find(id);
    if (!pos) throw LookupError("item " + std::to_string(id) + " missing from catalog");
    ids.push_back(id);
    masks.push_back(masks_[*pos]);
    titles.push_back(titles_[*pos]);
  }
  return ItemCatalog(genres_, std::move(ids), std::move(masks), std::move(titles));
}

ItemCatalog parse_items(const std::filesystem::path& path, DatasetFormat format) {
  auto in = open_or_throw(path);
  std::vector<std::string> genres;
  if (format == DatasetFormat::kMl100k) {
    genres.assign(kMl100kGenres.begin(), kMl100kGenres.end());
  } else {
    genres.assign(kMl1mGenres.begin(), kMl1mGenres.end());
  }
  std::vector<std::int64_t> ids;
  std::vector<GenreMask> masks;
  std::vector<std::string> titles;
  std::vector<std::size_t> no_genre;  // positions to patch with "unknown"
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (blank(line)) continue;
    GenreMask mask = 0;
    std::int64_t id = 0;
    std::string title;
    if (format == DatasetFormat::kMl100k) {
      const auto fields = split(line, "|");
      const std::size_t n_genres = kMl100kGenres.size();
      if (fields.size() < 2 + n_genres) {
        throw ParseError(where(path, line_no) + "expected at least " +
                         std::to_string(2 + n_genres) + " '|' fields");
      }
      const auto parsed = to_int<std::int64_t>(fields[0]);
      if (!parsed) throw ParseError(where(path, line_no) + "bad item id");
      id = *parsed;
      // Titles never contain '|' in the distributed file; the genre flags
      // are always the trailing 19 fields.
      title = std::string(fields[1]);
      const std::size_t first_flag = fields.size() - n_genres;
      for (std::size_t g = 0; g < n_genres; ++g) {
        const auto flag = to_int<int>(fields[first_flag + g]);
        if (!flag || (*flag != 0 && *flag != 1)) {
          throw ParseError(where(path, line_no) + "genre flag must be 0 or 1");
        }
        if (*flag) mask |= GenreMask{1} << g;
      }
      if (mask == 0) mask = GenreMask{1} << 0;  // "unknown" is genre 0
    } else {
      const std::size_t first = line.find("::");
      const std::size_t last = line.rfind("::");
      if (first == std::string::npos || first == last) {
        throw ParseError(where(path, line_no) + "expected id::title::genres");
      }
      const auto parsed = to_int<std::int64_t>(std::string_view(line).substr(0, first));
      if (!parsed) throw ParseError(where(path, line_no) + "bad item id");
      id = *parsed;
      title = line.substr(first + 2, last - first - 2);
      const std::string_view genre_field = std::string_view(line).substr(last + 2);
      std::vector<std::string> unknown;
      if (!blank(genre_field) && genre_field != "(no genres listed)") {
        for (auto name : split(genre_field, "|")) {
          bool found = false;
          for (std::size_t g = 0; g < kMl1mGenres.size(); ++g) {
            if (kMl1mGenres[g] == name) {
              mask |= GenreMask{1} << g;
              found = true;
            }
          }
          if (!found) unknown.emplace_back(name);
        }
      }
      if (!unknown.empty()) {
        std::string msg = where(path, line_no) + "unknown genre(s):";
        for (const auto& u : unknown) msg += " '" + u + "'";
        throw ValidationError(msg);
      }
      if (mask == 0) no_genre.push_back(masks.size());
    }
    ids.push_back(id);
    masks.push_back(mask);
    titles.push_back(std::move(title));
  }
  if (!no_genre.empty()) {
    genres.emplace_back(ItemCatalog::kUnknownGenre);
    const GenreMask unknown_bit = GenreMask{1} << (genres.size() - 1);
    for (std::size_t pos : no_genre) masks[pos] = unknown_bit;
  }
  return ItemCatalog(std::move(genres), std::move(ids), std::move(masks),
                     std::move(titles));
}

std::filesystem::path ratings_file(const std::filesystem::path& dir,
                                   DatasetFormat format) {
  return dir / (format == DatasetFormat::kMl100k ? "u.data" : "ratings.dat");
}

std::filesystem::path items_file(const std::filesystem::path& dir,
                                 DatasetFormat format) {
  return dir / (format == DatasetFormat::kMl100k ? "u.item" : "movies.dat");
}

Dataset load_dataset(const std::filesystem::path& dir, DatasetFormat format,
                     RatingScale scale) {
  Dataset ds;
  ds.format = format;
  ds.records = format == DatasetFormat::kMl100k
                   ? parse_ml100k_ratings(ratings_file(dir, format), scale)
                   : parse_ml1m_ratings(ratings_file(dir, format), scale);
  ds.ratings = reindex(ds.records, scale);
  ds.catalog = parse_items(items_file(dir, format), format).aligned_to(ds.ratings.items);
  return ds;
}

// ---------------------------------------------------------------------------
// Folds

FoldSpec kfold_split(const RatingMatrix& matrix, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold split requires k >= 2, got " + std::to_string(k));
  const auto triplets = matrix.triplets();
  std::vector<std::vector<std::size_t>> per_user(matrix.n_users());
  for (std::size_t pos = 0; pos < triplets.size(); ++pos) {
    per_user[triplets[pos].user].push_back(pos);
  }
  // fold_of[pos] == k marks "train in every fold".
  std::vector<int> fold_of(triplets.size(), k);
  Rng rng(seed);
  for (auto& records : per_user) {
    if (records.size() < static_cast<std::size_t>(k)) continue;
    shuffle(std::span<std::size_t>(records), rng);
    for (std::size_t r = 0; r < records.size(); ++r) {
      fold_of[records[r]] = static_cast<int>(r % static_cast<std::size_t>(k));
    }
  }
  FoldSpec spec;
  spec.k = k;
  spec.seed = seed;
  spec.folds.resize(static_cast<std::size_t>(k));
  for (std::size_t pos = 0; pos < triplets.size(); ++pos) {
    for (int f = 0; f < k; ++f) {
      auto& fold = spec.folds[static_cast<std::size_t>(f)];
      (fold_of[pos] == f ? fold.probe : fold.train).push_back(pos);
    }
  }
  return spec;
}

}  // namespace nemf
