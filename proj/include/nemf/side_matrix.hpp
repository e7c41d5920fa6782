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
#include <span>
#include <string_view>
#include <vector>

#include "nemf/dataset.hpp"

namespace nemf {

enum class SideKind {
  kExplainUser,
  kExplainItem,
  kNoveltyDistance,
  kNoveltyPopularity,
  kNoveltyTopic,
};

std::string_view to_string(SideKind kind);

struct SideMeta {
  SideKind kind = SideKind::kExplainUser;
  int k = 0;                   // neighborhood size (explainability kinds)
  int positive_threshold = 0;  // P_tau (explainability kinds)
  bool normalized = false;
  friend bool operator==(const SideMeta&, const SideMeta&) = default;
};

struct SideEntry {
  std::uint32_t item = 0;
  double weight = 0.0;
  friend bool operator==(const SideEntry&, const SideEntry&) = default;
};

// Sparse user x item matrix of non-negative weights (explainability E or
// novelty N). Absent entries read as zero.
class SideMatrix {
 public:
  SideMatrix() = default;
  // `rows[u]` must be sorted by item with unique items and weights >= 0.
  SideMatrix(std::size_t n_users, std::size_t n_items, SideMeta meta,
             std::vector<std::vector<SideEntry>> rows);

  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }
  std::size_t nnz() const { return entries_.size(); }
  const SideMeta& meta() const { return meta_; }

  std::span<const SideEntry> row(std::uint32_t u) const;
  double at(std::uint32_t u, std::uint32_t i) const;
  double max_weight() const;

  // Copy with every weight divided by `divisor` (> 0), marked normalized.
  SideMatrix scaled(double divisor) const;

  // Weight for each triplet, in triplet order (0 where absent).
  std::vector<double> gather(std::span<const Rating> triplets) const;

  // `user item weight` lines. External ids when maps are given.
  void write_triplets(std::ostream& out, const IdMap* users = nullptr,
                      const IdMap* items = nullptr) const;

  friend bool operator==(const SideMatrix&, const SideMatrix&) = default;

 private:
  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  SideMeta meta_{};
  std::vector<std::size_t> row_ptr_{0};
  std::vector<SideEntry> entries_;
};

}  // namespace nemf
