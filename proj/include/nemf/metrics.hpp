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

#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "nemf/dataset.hpp"
#include "nemf/explainability.hpp"
#include "nemf/novelty.hpp"
#include "nemf/ranking.hpp"
#include "nemf/side_matrix.hpp"

namespace nemf {

using RelevantSet = std::unordered_set<std::uint32_t>;

// Probe items of user u rated >= threshold.
RelevantSet relevant_items(const RatingMatrix& probe, std::uint32_t u, int threshold);

// Rank discount: 1 at rank 1, 1 / log2(rank) from rank 2 on.
double rank_discount(std::size_t rank);

// sum_r gains[r-1] * rank_discount(r).
double discounted_gain(std::span<const double> gains);

// |hits| / N with N = list.requested.
double precision_at_n(const RankedList& list, const RelevantSet& relevant);

// Binary-gain nDCG; ideal = min(N, |relevant|) hits at the top. 0 when
// nothing is relevant.
double accuracy_ndcg(const RankedList& list, const RelevantSet& relevant);

// Mean over lists of |{i in L_u : E[u,i] > threshold}| / N.
double mep(std::span<const RankedList> lists, const SideMatrix& explain_raw,
           double threshold = 0.0);
double mep(const RankedList& list, const SideMatrix& explain_raw, double threshold = 0.0);

// Explainability nDCG of one list: gains E[u,l] (raw), ideal gain
// E_max = scale.max * cfg.k at every one of the N positions.
double e_ndcg(const RankedList& list, const SideMatrix& explain_raw, const ExplainConfig& cfg,
              RatingScale scale);

// Novelty nDCG of one list: gains N[u,l], ideal gain model.max() at every
// position.
double n_ndcg(const RankedList& list, const NoveltyModel& novelty);

// Unweighted mean novelty of the listed items (over the items present).
double list_novelty(const RankedList& list, const NoveltyModel& novelty);

// Two-tailed paired t-test p-value. Zero-variance differences give 1 when the
// mean difference is 0 and 0 otherwise. Requires equal sizes >= 2.
double paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace nemf
