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
#include "nemf/neighborhood.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "nemf/errors.hpp"
#include "nemf/parallel.hpp"
#include "nemf/random.hpp"

namespace nemf {
namespace {

// Sparse rows of one axis of the matrix.
using RowFn = std::span<const RatingEntry> (RatingMatrix::*)(std::uint32_t) const;

NeighborGraph build_graph(const RatingMatrix& matrix, int k, int workers,
                          std::size_t n_nodes, std::size_t n_other, RowFn row_of) {
  if (k < 1) throw ConfigError("neighbor count k must be >= 1");
  // Inverted index: for each position on the other axis, the nodes that
  // rated it. Used to enumerate only nodes sharing at least one rating.
  std::vector<std::vector<std::uint32_t>> raters(n_other);
  for (std::uint32_t a = 0; a < n_nodes; ++a) {
    for (const auto& e : (matrix.*row_of)(a)) raters[e.index].push_back(a);
  }
  std::vector<std::vector<Neighbor>> lists(n_nodes);
  parallel_for(n_nodes, workers, [&](std::size_t node) {
    const auto a = static_cast<std::uint32_t>(node);
    std::vector<char> seen(n_nodes, 0);
    std::vector<Neighbor> candidates;
    for (const auto& e : (matrix.*row_of)(a)) {
      for (std::uint32_t b : raters[e.index]) {
        if (b == a || seen[b]) continue;
        seen[b] = 1;
        candidates.push_back({b, pearson((matrix.*row_of)(a), (matrix.*row_of)(b))});
      }
    }
    lists[node] = select_top_k(std::move(candidates), k);
  });
  return NeighborGraph(k, std::move(lists));
}

}  // namespace

double pearson(std::span<const RatingEntry> a, std::span<const RatingEntry> b) {
  // First pass: co-rated means.
  std::size_t n = 0;
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t x = 0, y = 0; x < a.size() && y < b.size();) {
    if (a[x].index < b[y].index) {
      ++x;
    } else if (b[y].index < a[x].index) {
      ++y;
    } else {
      sum_a += a[x].value;
      sum_b += b[y].value;
      ++n;
      ++x;
      ++y;
    }
  }
  if (n < 2) return 0.0;
  const double mean_a = sum_a / static_cast<double>(n);
  const double mean_b = sum_b / static_cast<double>(n);
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t x = 0, y = 0; x < a.size() && y < b.size();) {
    if (a[x].index < b[y].index) {
      ++x;
    } else if (b[y].index < a[x].index) {
      ++y;
    } else {
      const double da = a[x].value - mean_a;
      const double db = b[y].value - mean_b;
      cov += da * db;
      var_a += da * da;
      var_b += db * db;
      ++x;
      ++y;
    }
  }
  if (var_a <= 0.0 || var_b <= 0.0) return 0.0;
  const double sim = cov / (std::sqrt(var_a) * std::sqrt(var_b));
  return std::clamp(sim, -1.0, 1.0);
}

double pearson(const RatingMatrix& matrix, std::uint32_t u, std::uint32_t v) {
  return pearson(matrix.user_row(u), matrix.user_row(v));
}

double item_pearson(const RatingMatrix& matrix, std::uint32_t i, std::uint32_t j) {
  return pearson(matrix.item_column(i), matrix.item_column(j));
}

NeighborGraph::NeighborGraph(int k, std::vector<std::vector<Neighbor>> lists)
    : k_(k), lists_(std::move(lists)) {}

std::span<const Neighbor> NeighborGraph::neighbors(std::uint32_t node) const {
  if (node >= lists_.size()) {
    throw LookupError("graph node " + std::to_string(node) + " out of range");
  }
  return lists_[node];
}

std::int64_t similarity_key(double similarity) {
  return std::llround(similarity * 1e12);
}

std::vector<Neighbor> select_top_k(std::vector<Neighbor> candidates, int k) {
  const auto keep = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(k));
  const auto better = [](const Neighbor& x, const Neighbor& y) {
    const auto kx = similarity_key(x.similarity), ky = similarity_key(y.similarity);
    if (kx != ky) return kx > ky;
    return x.index < y.index;
  };
  std::partial_sort(candidates.begin(),
                    candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), better);
  candidates.resize(keep);
  return candidates;
}

NeighborGraph build_user_graph(const RatingMatrix& matrix, int k, int workers) {
  return build_graph(matrix, k, workers, matrix.n_users(), matrix.n_items(),
                     &RatingMatrix::user_row);
}

NeighborGraph build_item_graph(const RatingMatrix& matrix, int k, int workers) {
  return build_graph(matrix, k, workers, matrix.n_items(), matrix.n_users(),
                     &RatingMatrix::item_column);
}

std::uint64_t fingerprint(const RatingMatrix& matrix) {
  std::uint64_t h = splitmix64(matrix.n_users() * 0x9e3779b97f4a7c15ULL ^ matrix.n_items());
  for (const Rating& r : matrix.triplets()) {
    h = splitmix64(h ^ (static_cast<std::uint64_t>(r.user) << 32 | r.item));
    h = splitmix64(h ^ static_cast<std::uint64_t>(r.value));
  }
  return h;
}

void save_graph(const NeighborGraph& graph, std::uint64_t fp,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "nemf-graph " << fp << ' ' << graph.k() << ' ' << graph.size() << '\n';
  char buf[64];
  for (std::uint32_t a = 0; a < graph.size(); ++a) {
    for (const auto& nb : graph.neighbors(a)) {
      const auto res = std::to_chars(buf, buf + sizeof buf, nb.similarity,
                                     std::chars_format::hex);
      out << a << ' ' << nb.index << ' ' << std::string_view(buf, res.ptr) << '\n';
    }
  }
}

std::optional<NeighborGraph> load_graph(const std::filesystem::path& path,
                                        std::uint64_t fp, int k) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string magic;
  std::uint64_t file_fp = 0;
  int file_k = 0;
  std::size_t nodes = 0;
  if (!(in >> magic >> file_fp >> file_k >> nodes) || magic != "nemf-graph") {
    throw ParseError(path.string() + ":1: not a neighbor graph cache");
  }
  if (file_fp != fp || file_k != k) return std::nullopt;
  std::vector<std::vector<Neighbor>> lists(nodes);
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::uint32_t a = 0, b = 0;
    std::string sim_text;
    if (!(fields >> a >> b >> sim_text) || a >= nodes || b >= nodes) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad graph entry");
    }
    double sim = 0.0;
    const auto res = std::from_chars(sim_text.data(), sim_text.data() + sim_text.size(),
                                     sim, std::chars_format::hex);
    if (res.ec != std::errc()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad similarity");
    }
    lists[a].push_back({b, sim});
  }
  return NeighborGraph(k, std::move(lists));
}

}  // namespace nemf
