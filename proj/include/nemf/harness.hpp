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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nemf/dataset.hpp"
#include "nemf/explainability.hpp"
#include "nemf/factorization.hpp"
#include "nemf/neighborhood.hpp"
#include "nemf/novelty.hpp"
#include "nemf/ranking.hpp"
#include "nemf/side_matrix.hpp"

namespace nemf {

enum class Reranker { kNone, kMmr };

Reranker parse_reranker(std::string_view name);
std::string_view to_string(Reranker reranker);

// One algorithm of the comparison grid.
struct CellSpec {
  std::string name;
  TrainConfig train;  // train.seed is replaced by the derived per-fold seed
  Reranker reranker = Reranker::kNone;
  double mmr_lambda = 0.5;
  std::size_t mmr_pool = 100;
};

struct MetricConfig {
  std::size_t list_size = 10;  // N
  ExplainConfig explain{};     // k and P_tau, shared by E construction and E-nDCG
  int relevance_threshold = 4;
  double mep_threshold = 0.0;
  NoveltyKind novelty = NoveltyKind::kDistance;
};

// Optional NEMF row picked from a (lambda, delta) grid: the pair maximizing
// the harmonic mean of (nDCG, E-nDCG, N-nDCG), each divided by its grid max.
struct TradeoffSweep {
  std::string name = "NEMF";
  TrainConfig base;
  std::vector<double> lambdas;
  std::vector<double> deltas;
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::filesystem::path dataset;
  DatasetFormat format = DatasetFormat::kMl100k;
  std::vector<CellSpec> cells;
  std::optional<TradeoffSweep> tradeoff;
  int folds = 4;
  std::vector<int> only_folds;  // run a subset of the folds (all when empty)
  std::uint64_t master_seed = 2018;
  MetricConfig metrics;
  std::filesystem::path output_dir;  // nothing is written when empty
  int workers = 1;
  std::string baseline;  // p-values are computed against it; first cell when empty

  void validate() const;
};

ExperimentSpec parse_experiment_spec(std::string_view json_text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
// Fully resolved configuration with every default materialized.
std::string experiment_spec_to_json(const ExperimentSpec& spec);

inline constexpr std::array<std::string_view, 5> kMetricNames = {
    "precision", "ndcg", "mep", "e_ndcg", "n_ndcg"};

struct MetricValues {
  std::array<double, 5> values{};  // ordered as kMetricNames

  double& operator[](std::size_t m) { return values[m]; }
  double operator[](std::size_t m) const { return values[m]; }
  double precision() const { return values[0]; }
  double ndcg() const { return values[1]; }
  double mep() const { return values[2]; }
  double e_ndcg() const { return values[3]; }
  double n_ndcg() const { return values[4]; }
};

struct CellResult {
  std::string name;
  std::string description;  // e.g. the (lambda, delta) picked for a tradeoff row
  bool failed = false;
  std::string error;
  std::vector<MetricValues> folds;
  MetricValues mean;
  std::array<std::optional<double>, 5> p_values;  // vs. the baseline cell
  std::vector<std::vector<double>> rmse_logs;     // per fold
};

struct EvalReport {
  std::string experiment;
  std::vector<int> folds;  // fold indices evaluated
  std::string baseline;
  std::vector<CellResult> cells;

  const CellResult& cell(std::string_view name) const;  // LookupError
};

// Everything derived from one fold's training split.
struct FoldContext {
  int index = 0;
  RatingMatrix train;
  RatingMatrix probe;
  NeighborGraph graph;
  SideMatrix explain_raw;    // metrics
  SideMatrix explain_train;  // normalized, consumed by training
  SideMatrix novelty_raw;
  SideMatrix novelty_train;
  std::optional<NoveltyModel> novelty_model;  // references the catalog
};

FoldContext prepare_fold(const Dataset& dataset, const Fold& fold, int index,
                         const MetricConfig& metrics, int workers = 1);

// Lists and metrics of one trained model on one fold, averaged over users
// with a non-empty probe set.
MetricValues evaluate_model(const FactorModel& model, const FoldContext& ctx,
                            const Dataset& dataset, const CellSpec& cell,
                            const MetricConfig& metrics);

// Called once per fold after its context is built (before any training).
using FoldObserver = std::function<void(const FoldContext&)>;

EvalReport run_experiment(const ExperimentSpec& spec, const Dataset& dataset,
                          const FoldObserver& observer = {});
// Loads the dataset named by the experiment spec first.
EvalReport run_experiment(const ExperimentSpec& spec);

enum class SweepParam { kLambda, kDelta, kBoth };
SweepParam parse_sweep_param(std::string_view name);
std::string_view to_string(SweepParam param);

struct SweepRow {
  double lambda = 0.0;
  double delta = 0.0;
  bool failed = false;
  MetricValues mean;
};

struct SweepTable {
  SweepParam param = SweepParam::kDelta;
  std::vector<SweepRow> rows;
};

// One cell per value (per (lambda, delta) pair for kBoth), derived from the
// spec's first cell. Writes sweep_<param>.csv (wide) and
// sweep_<param>_long.csv (x, series, value) when output_dir is set.
SweepTable sensitivity_sweep(const ExperimentSpec& spec, const Dataset& dataset,
                             SweepParam param, std::span<const double> values);

// Index of the row with the best harmonic mean of column-max-normalized
// (nDCG, E-nDCG, N-nDCG); failed rows are skipped.
std::size_t select_tradeoff(const SweepTable& table);

// Rows per cell, columns Prec / nDCG / MEP / E-nDCG / N-nDCG in percent, the
// best value per column marked with '*', failed cells marked FAILED.
std::string compare_table(const EvalReport& report);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view json_text);
std::string report_to_csv(const EvalReport& report);
std::string sweep_to_csv(const SweepTable& table);
std::string sweep_to_long_csv(const SweepTable& table);

}  // namespace nemf
