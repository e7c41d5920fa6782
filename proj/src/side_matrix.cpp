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
#include "nemf/side_matrix.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <string>

#include "nemf/errors.hpp"

namespace nemf {

std::string_view to_string(SideKind kind) {
  switch (kind) {
    case SideKind::kExplainUser: return "explainability-user";
    case SideKind::kExplainItem: return "explainability-item";
    case SideKind::kNoveltyDistance: return "novelty-distance";
    case SideKind::kNoveltyPopularity: return "novelty-popularity";
    case SideKind::kNoveltyTopic: return "novelty-topic";
  }
  return "?";
}

SideMatrix::SideMatrix(std::size_t n_users, std::size_t n_items, SideMeta meta,
                       std::vector<std::vector<SideEntry>> rows)
    : n_users_(n_users), n_items_(n_items), meta_(meta) {
  if (rows.size() != n_users_) {
    throw ValidationError("side matrix needs one row per user");
  }
  row_ptr_.reserve(n_users_ + 1);
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k].item >= n_items_ || !(row[k].weight >= 0.0)) {
        throw ValidationError("side matrix entry out of range or negative");
      }
      if (k > 0 && row[k - 1].item >= row[k].item) {
        throw ValidationError("side matrix row not strictly sorted");
      }
    }
    entries_.insert(entries_.end(), row.begin(), row.end());
    row_ptr_.push_back(entries_.size());
  }
}

std::span<const SideEntry> SideMatrix::row(std::uint32_t u) const {
  if (u >= n_users_) throw LookupError("user index " + std::to_string(u) + " out of range");
  return {entries_.data() + row_ptr_[u], row_ptr_[u + 1] - row_ptr_[u]};
}

double SideMatrix::at(std::uint32_t u, std::uint32_t i) const {
  if (i >= n_items_) throw LookupError("item index " + std::to_string(i) + " out of range");
  const auto r = row(u);
  const auto it = std::lower_bound(
      r.begin(), r.end(), i,
      [](const SideEntry& e, std::uint32_t key) { return e.item < key; });
  return (it != r.end() && it->item == i) ? it->weight : 0.0;
}

double SideMatrix::max_weight() const {
  double best = 0.0;
  for (const auto& e : entries_) best = std::max(best, e.weight);
  return best;
}

SideMatrix SideMatrix::scaled(double divisor) const {
  if (!(divisor > 0.0)) throw ConfigError("normalization divisor must be positive");
  SideMatrix out = *this;
  for (auto& e : out.entries_) e.weight /= divisor;
  out.meta_.normalized = true;
  return out;
}

std::vector<double> SideMatrix::gather(std::span<const Rating> triplets) const {
  std::vector<double> out;
  out.reserve(triplets.size());
  for (const Rating& r : triplets) out.push_back(at(r.user, r.item));
  return out;
}

void SideMatrix::write_triplets(std::ostream& out, const IdMap* users,
                                const IdMap* items) const {
  const auto old_precision = out.precision(17);
  for (std::uint32_t u = 0; u < n_users_; ++u) {
    for (const auto& e : row(u)) {
      out << (users ? users->external(u) : u) << ' '
          << (items ? items->external(e.item) : e.item) << ' ' << e.weight << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace nemf
