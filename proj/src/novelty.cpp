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
#include "nemf/novelty.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <string>

#include "nemf/errors.hpp"
#include "nemf/parallel.hpp"

namespace nemf {

NoveltyKind parse_novelty_kind(std::string_view name) {
  if (name == "distance") return NoveltyKind::kDistance;
  if (name == "popularity") return NoveltyKind::kPopularity;
  if (name == "topic" || name == "topic-coverage") return NoveltyKind::kTopicCoverage;
  throw ConfigError("unknown novelty kind '" + std::string(name) +
                    "' (expected distance, popularity or topic)");
}

std::string_view to_string(NoveltyKind kind) {
  switch (kind) {
    case NoveltyKind::kDistance: return "distance";
    case NoveltyKind::kPopularity: return "popularity";
    case NoveltyKind::kTopicCoverage: return "topic";
  }
  return "?";
}

double jaccard_distance(GenreMask a, GenreMask b) {
  const int uni = std::popcount(a | b);
  if (uni == 0) return 0.0;
  return 1.0 - static_cast<double>(std::popcount(a & b)) / uni;
}

double jaccard_distance(const ItemCatalog& catalog, std::size_t i, std::size_t j) {
  return jaccard_distance(catalog.mask(i), catalog.mask(j));
}

double distance_novelty(const RatingMatrix& matrix, const ItemCatalog& catalog,
                        std::uint32_t u, std::uint32_t i) {
  const auto row = matrix.user_row(u);
  if (row.empty()) return 1.0;
  const GenreMask target = catalog.mask(i);
  double sum = 0.0;
  for (const auto& e : row) sum += jaccard_distance(target, catalog.mask(e.index));
  return sum / static_cast<double>(row.size());
}

double popularity_novelty(const RatingMatrix& matrix, std::uint32_t i) {
  const double users = static_cast<double>(matrix.n_users());
  const auto raters = matrix.item_column(i).size();
  if (raters == 0) return -std::log2(1.0 / users);
  return -std::log2(static_cast<double>(raters) / users);
}

double topic_coverage_novelty(const RatingMatrix& matrix, const ItemCatalog& catalog,
                              std::uint32_t u, std::size_t genre) {
  if (genre >= catalog.genre_count()) throw LookupError("genre index out of range");
  const GenreMask bit = GenreMask{1} << genre;
  std::size_t count = 0;
  for (const auto& e : matrix.user_row(u)) {
    if (catalog.mask(e.index) & bit) ++count;
  }
  return count == 0 ? 1.0 : 1.0 / static_cast<double>(count);
}

double novelty_max(NoveltyKind kind, const RatingMatrix& matrix) {
  if (kind == NoveltyKind::kPopularity) {
    return -std::log2(1.0 / static_cast<double>(matrix.n_users()));
  }
  return 1.0;
}

NoveltyModel::NoveltyModel(const RatingMatrix& train, const ItemCatalog& catalog,
                           NoveltyKind kind)
    : kind_(kind),
      catalog_(&catalog),
      n_users_(train.n_users()),
      max_(novelty_max(kind, train)) {
  if (catalog.size() != train.n_items()) {
    throw ConfigError("item catalog is not aligned with the rating matrix");
  }
  switch (kind_) {
    case NoveltyKind::kDistance:
      groups_.resize(n_users_);
      history_size_.resize(n_users_);
      for (std::uint32_t u = 0; u < n_users_; ++u) {
        std::map<GenreMask, std::uint32_t> by_mask;
        for (const auto& e : train.user_row(u)) ++by_mask[catalog.mask(e.index)];
        groups_[u].assign(by_mask.begin(), by_mask.end());
        history_size_[u] = static_cast<std::uint32_t>(train.user_row(u).size());
      }
      break;
    case NoveltyKind::kPopularity:
      popularity_.resize(train.n_items());
      for (std::uint32_t i = 0; i < train.n_items(); ++i) {
        popularity_[i] = popularity_novelty(train, i);
      }
      break;
    case NoveltyKind::kTopicCoverage: {
      const std::size_t g = catalog.genre_count();
      genre_counts_.assign(n_users_ * g, 0);
      for (std::uint32_t u = 0; u < n_users_; ++u) {
        for (const auto& e : train.user_row(u)) {
          const GenreMask m = catalog.mask(e.index);
          for (std::size_t c = 0; c < g; ++c) {
            if (m & (GenreMask{1} << c)) ++genre_counts_[u * g + c];
          }
        }
      }
      break;
    }
  }
}

double NoveltyModel::operator()(std::uint32_t u, std::uint32_t i) const {
  if (u >= n_users_) throw LookupError("user index out of range");
  switch (kind_) {
    case NoveltyKind::kDistance: {
      if (history_size_[u] == 0) return 1.0;
      const GenreMask target = catalog_->mask(i);
      double sum = 0.0;
      for (const auto& [mask, count] : groups_[u]) {
        sum += count * jaccard_distance(target, mask);
      }
      return sum / history_size_[u];
    }
    case NoveltyKind::kPopularity:
      if (i >= popularity_.size()) throw LookupError("item index out of range");
      return popularity_[i];
    case NoveltyKind::kTopicCoverage: {
      const GenreMask m = catalog_->mask(i);
      const std::size_t g = catalog_->genre_count();
      double sum = 0.0;
      int genres = 0;
      for (std::size_t c = 0; c < g; ++c) {
        if (!(m & (GenreMask{1} << c))) continue;
        const auto count = genre_counts_[u * g + c];
        sum += count == 0 ? 1.0 : 1.0 / count;
        ++genres;
      }
      return sum / genres;
    }
  }
  return 0.0;
}

SideMatrix build_N_matrix(const RatingMatrix& train, const ItemCatalog& catalog,
                          NoveltyKind kind, int workers) {
  const NoveltyModel model(train, catalog, kind);
  std::vector<std::vector<SideEntry>> rows(train.n_users());
  parallel_for(train.n_users(), workers, [&](std::size_t u) {
    const auto user = static_cast<std::uint32_t>(u);
    for (const auto& e : train.user_row(user)) {
      rows[u].push_back({e.index, model(user, e.index)});
    }
  });
  SideKind side = SideKind::kNoveltyDistance;
  if (kind == NoveltyKind::kPopularity) side = SideKind::kNoveltyPopularity;
  if (kind == NoveltyKind::kTopicCoverage) side = SideKind::kNoveltyTopic;
  return SideMatrix(train.n_users(), train.n_items(), {side, 0, 0, false}, std::move(rows));
}

SideMatrix training_novelty(const SideMatrix& raw, const RatingMatrix& train) {
  if (raw.meta().normalized) return raw;
  if (raw.meta().kind == SideKind::kNoveltyPopularity) {
    return raw.scaled(novelty_max(NoveltyKind::kPopularity, train));
  }
  return raw.scaled(1.0);
}

}  // namespace nemf
