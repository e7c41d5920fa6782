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
#include "nemf/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "nemf/errors.hpp"

namespace nemf {

RelevantSet relevant_items(const RatingMatrix& probe, std::uint32_t u, int threshold) {
  RelevantSet out;
  for (const auto& e : probe.user_row(u)) {
    if (e.value >= threshold) out.insert(e.index);
  }
  return out;
}

double rank_discount(std::size_t rank) {
  return rank <= 1 ? 1.0 : 1.0 / std::log2(static_cast<double>(rank));
}

double discounted_gain(std::span<const double> gains) {
  double dcg = 0.0;
  for (std::size_t r = 0; r < gains.size(); ++r) dcg += gains[r] * rank_discount(r + 1);
  return dcg;
}

namespace {

// Ideal DCG for N positions all carrying gain `g`.
double ideal_constant(std::size_t n, double g) {
  double idcg = 0.0;
  for (std::size_t r = 1; r <= n; ++r) idcg += g * rank_discount(r);
  return idcg;
}

double ratio(double num, double den) { return den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0; }

}  // namespace

double precision_at_n(const RankedList& list, const RelevantSet& relevant) {
  if (list.requested == 0) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : list.items) hits += relevant.count(s.item);
  return static_cast<double>(hits) / static_cast<double>(list.requested);
}

double accuracy_ndcg(const RankedList& list, const RelevantSet& relevant) {
  if (relevant.empty() || list.requested == 0) return 0.0;
  std::vector<double> gains;
  gains.reserve(list.items.size());
  for (const auto& s : list.items) gains.push_back(relevant.count(s.item) ? 1.0 : 0.0);
  const std::size_t ideal_hits = std::min(list.requested, relevant.size());
  return ratio(discounted_gain(gains), ideal_constant(ideal_hits, 1.0));
}

double mep(const RankedList& list, const SideMatrix& explain_raw, double threshold) {
  if (list.requested == 0) return 0.0;
  std::size_t explained = 0;
  for (const auto& s : list.items) {
    if (explain_raw.at(list.user, s.item) > threshold) ++explained;
  }
  return static_cast<double>(explained) / static_cast<double>(list.requested);
}

double mep(std::span<const RankedList> lists, const SideMatrix& explain_raw, double threshold) {
  if (lists.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& l : lists) sum += mep(l, explain_raw, threshold);
  return sum / static_cast<double>(lists.size());
}

double e_ndcg(const RankedList& list, const SideMatrix& explain_raw, const ExplainConfig& cfg,
              RatingScale scale) {
  std::vector<double> gains;
  gains.reserve(list.items.size());
  for (const auto& s : list.items) gains.push_back(explain_raw.at(list.user, s.item));
  return ratio(discounted_gain(gains),
               ideal_constant(list.requested, explainability_max(cfg, scale)));
}

double n_ndcg(const RankedList& list, const NoveltyModel& novelty) {
  std::vector<double> gains;
  gains.reserve(list.items.size());
  for (const auto& s : list.items) gains.push_back(novelty(list.user, s.item));
  return ratio(discounted_gain(gains), ideal_constant(list.requested, novelty.max()));
}

double list_novelty(const RankedList& list, const NoveltyModel& novelty) {
  if (list.items.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : list.items) sum += novelty(list.user, s.item);
  return sum / static_cast<double>(list.items.size());
}

double paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("paired t-test needs samples of equal size");
  if (a.size() < 2) throw ConfigError("paired t-test needs at least two pairs");
  const auto n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) mean += a[k] - b[k];
  mean /= n;
  double ss = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) return mean == 0.0 ? 1.0 : 0.0;
  const double t = mean / (sd / std::sqrt(n));
  const boost::math::students_t dist(n - 1.0);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

}  // namespace nemf
