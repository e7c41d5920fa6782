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
#include "nemf/explainability.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "nemf/errors.hpp"
#include "nemf/parallel.hpp"

namespace nemf {
namespace {

void check_graph(const NeighborGraph& graph, std::size_t nodes, const ExplainConfig& cfg) {
  if (graph.k() != cfg.k) {
    throw ConfigError("neighbor graph built with k=" + std::to_string(graph.k()) +
                      " but explainability uses k=" + std::to_string(cfg.k));
  }
  if (graph.size() != nodes) {
    throw ConfigError("neighbor graph does not match the rating matrix");
  }
}

// Dense per-row accumulator flushed into a sorted sparse row.
struct Accumulator {
  std::vector<double> sums;
  std::vector<char> marked;
  std::vector<std::uint32_t> touched;

  explicit Accumulator(std::size_t n) : sums(n, 0.0), marked(n, 0) {}

  void add(std::uint32_t i, double w) {
    if (!marked[i]) {
      marked[i] = 1;
      touched.push_back(i);
    }
    sums[i] += w;
  }

  std::vector<SideEntry> flush() {
    std::sort(touched.begin(), touched.end());
    std::vector<SideEntry> row;
    row.reserve(touched.size());
    for (std::uint32_t i : touched) {
      if (sums[i] > 0.0) row.push_back({i, sums[i]});
      sums[i] = 0.0;
      marked[i] = 0;
    }
    touched.clear();
    return row;
  }
};

}  // namespace

void ExplainConfig::validate(RatingScale scale) const {
  if (k < 1) throw ConfigError("explainability k must be >= 1");
  if (!scale.contains(positive_threshold)) {
    throw ConfigError("positive threshold " + std::to_string(positive_threshold) +
                      " outside the rating scale");
  }
}

int RatingHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0);
}

double explainability_power(const RatingHistogram& histogram, int positive_threshold) {
  double e = 0.0;
  for (int r = std::max(positive_threshold, histogram.scale.min); r <= histogram.scale.max; ++r) {
    e += static_cast<double>(r) * histogram.count(r);
  }
  return e;
}

RatingHistogram neighbor_histogram(const RatingMatrix& matrix,
                                   const NeighborGraph& user_graph,
                                   std::uint32_t u, std::uint32_t i) {
  if (i >= matrix.n_items()) throw LookupError("item index out of range");
  RatingHistogram h{matrix.scale(),
                    std::vector<int>(static_cast<std::size_t>(matrix.scale().max -
                                                              matrix.scale().min + 1))};
  for (const auto& nb : user_graph.neighbors(u)) {
    if (auto r = matrix.rating(nb.index, i)) ++h.counts[static_cast<std::size_t>(*r - h.scale.min)];
  }
  return h;
}

SideMatrix build_user_style_E(const RatingMatrix& matrix, const NeighborGraph& graph,
                              const ExplainConfig& cfg, int workers) {
  cfg.validate(matrix.scale());
  check_graph(graph, matrix.n_users(), cfg);
  std::vector<std::vector<SideEntry>> rows(matrix.n_users());
  parallel_for(matrix.n_users(), workers, [&](std::size_t u) {
    Accumulator acc(matrix.n_items());
    for (const auto& nb : graph.neighbors(static_cast<std::uint32_t>(u))) {
      for (const auto& e : matrix.user_row(nb.index)) {
        if (e.value >= cfg.positive_threshold) acc.add(e.index, e.value);
      }
    }
    rows[u] = acc.flush();
  });
  return SideMatrix(matrix.n_users(), matrix.n_items(),
                    {SideKind::kExplainUser, cfg.k, cfg.positive_threshold, false},
                    std::move(rows));
}

SideMatrix build_item_style_E(const RatingMatrix& matrix,
                              const NeighborGraph& item_graph,
                              const ExplainConfig& cfg, int workers) {
  cfg.validate(matrix.scale());
  check_graph(item_graph, matrix.n_items(), cfg);
  // reverse[j] = items i whose neighborhood contains j
  std::vector<std::vector<std::uint32_t>> reverse(matrix.n_items());
  for (std::uint32_t i = 0; i < matrix.n_items(); ++i) {
    for (const auto& nb : item_graph.neighbors(i)) reverse[nb.index].push_back(i);
  }
  std::vector<std::vector<SideEntry>> rows(matrix.n_users());
  parallel_for(matrix.n_users(), workers, [&](std::size_t u) {
    Accumulator acc(matrix.n_items());
    for (const auto& e : matrix.user_row(static_cast<std::uint32_t>(u))) {
      if (e.value < cfg.positive_threshold) continue;
      for (std::uint32_t i : reverse[e.index]) acc.add(i, e.value);
    }
    rows[u] = acc.flush();
  });
  return SideMatrix(matrix.n_users(), matrix.n_items(),
                    {SideKind::kExplainItem, cfg.k, cfg.positive_threshold, false},
                    std::move(rows));
}

std::vector<RatingEntry> item_style_reasons(const RatingMatrix& matrix,
                                            const NeighborGraph& item_graph,
                                            const ExplainConfig& cfg, std::uint32_t u,
                                            std::uint32_t i) {
  check_graph(item_graph, matrix.n_items(), cfg);
  std::vector<RatingEntry> out;
  for (const auto& nb : item_graph.neighbors(i)) {
    const auto r = matrix.rating(u, nb.index);
    if (r && *r >= cfg.positive_threshold) out.push_back({nb.index, *r});
  }
  return out;
}

double explainability_max(const ExplainConfig& cfg, RatingScale scale) {
  return static_cast<double>(scale.max) * cfg.k;
}

SideMatrix normalize(const SideMatrix& raw, const ExplainConfig& cfg, RatingScale scale) {
  if (raw.meta().normalized) throw ConfigError("explainability matrix already normalized");
  return raw.scaled(explainability_max(cfg, scale));
}

std::string render_explanation(const RatingHistogram& histogram, const ExplainConfig& cfg,
                               const std::string& item_title) {
  std::ostringstream out;
  const double e = explainability_power(histogram, cfg.positive_threshold);
  if (histogram.total() == 0) {
    out << "No explanation available for " << item_title
        << ": none of your " << cfg.k << " nearest neighbours rated it.\n";
  } else {
    out << "We recommend you " << item_title
        << " because your neighbours' ratings for this item are the following:\n";
    out << "  Rating  Neighbours\n";
    for (int r = histogram.scale.min; r <= histogram.scale.max; ++r) {
      out << "  " << std::string(static_cast<std::size_t>(r), '*')
          << std::string(static_cast<std::size_t>(std::max(0, 6 - r)), ' ')
          << histogram.count(r) << '\n';
    }
  }
  out << "E = " << e << " (positive threshold " << cfg.positive_threshold << ", k = "
      << cfg.k << ")\n";
  out << "E normalized = " << e / explainability_max(cfg, histogram.scale) << '\n';
  return out.str();
}

}  // namespace nemf
