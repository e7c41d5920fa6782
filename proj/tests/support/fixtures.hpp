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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nemf/dataset.hpp"
#include "nemf/random.hpp"

namespace nemf::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("nemf_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Each (user, item) pair is rated with probability `density`.
inline RatingMatrix random_matrix(std::uint64_t seed, std::size_t n_users, std::size_t n_items,
                                  double density, RatingScale scale = {}) {
  Rng rng(seed);
  std::vector<Rating> triplets;
  const auto levels = static_cast<std::uint64_t>(scale.max - scale.min + 1);
  for (std::uint32_t u = 0; u < n_users; ++u) {
    for (std::uint32_t i = 0; i < n_items; ++i) {
      if (uniform_unit(rng) < density) {
        triplets.push_back({u, i, scale.min + static_cast<int>(uniform_index(rng, levels))});
      }
    }
  }
  return RatingMatrix(n_users, n_items, std::move(triplets), scale);
}

inline ItemCatalog random_catalog(std::uint64_t seed, std::size_t n_items, std::size_t n_genres) {
  Rng rng(seed);
  std::vector<std::string> genres;
  for (std::size_t g = 0; g < n_genres; ++g) genres.push_back("g" + std::to_string(g));
  std::vector<std::int64_t> ids;
  std::vector<GenreMask> masks;
  std::vector<std::string> titles;
  for (std::size_t i = 0; i < n_items; ++i) {
    GenreMask m = 0;
    while (m == 0) {
      for (std::size_t g = 0; g < n_genres; ++g) {
        if (uniform_unit(rng) < 0.3) m |= GenreMask{1} << g;
      }
    }
    ids.push_back(static_cast<std::int64_t>(i));
    masks.push_back(m);
    titles.push_back("Item " + std::to_string(i));
  }
  return ItemCatalog(std::move(genres), std::move(ids), std::move(masks), std::move(titles));
}

// MovieLens-100K style u.data / u.item with random ratings and genres.
inline void write_synthetic_ml100k(const std::filesystem::path& dir, std::uint64_t seed,
                                   std::size_t n_users, std::size_t n_items, double density) {
  const auto m = random_matrix(seed, n_users, n_items, density);
  std::ofstream data(dir / "u.data");
  for (const auto& t : m.triplets()) {
    data << t.user + 1 << '\t' << t.item + 1 << '\t' << t.value << '\t' << 880000000 + t.item
         << '\n';
  }
  Rng rng(seed + 1);
  std::ofstream items(dir / "u.item");
  for (std::size_t i = 0; i < n_items; ++i) {
    items << i + 1 << "|Movie " << i + 1 << " (1995)|01-Jan-1995||http://x";
    for (int g = 0; g < 19; ++g) items << '|' << (g > 0 && uniform_unit(rng) < 0.15 ? 1 : 0);
    items << '\n';
  }
}

inline std::filesystem::path ml100k_dir() {
  if (const char* env = std::getenv("NEMF_ML100K_DIR"); env && *env) return env;
  return std::filesystem::path(NEMF_SOURCE_DIR) / "data" / "ml-100k";
}

inline bool have_ml100k() {
  return std::filesystem::exists(ml100k_dir() / "u.data") &&
         std::filesystem::exists(ml100k_dir() / "u.item");
}

}  // namespace nemf::testing
