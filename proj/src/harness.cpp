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
#include "nemf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nemf/errors.hpp"
#include "nemf/metrics.hpp"
#include "nemf/parallel.hpp"
#include "nemf/random.hpp"

namespace nemf {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON <-> config

const std::set<std::string> kTrainKeys = {"factors", "learning_rate", "beta",     "lambda",
                                          "delta",   "norm",          "epochs",   "seed",
                                          "init_scale", "early_stop"};

bool is_train_key(const std::string& key) { return kTrainKeys.count(key) > 0; }

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

void apply_train_keys(const json& j, TrainConfig& cfg) {
  for (const auto& [key, value] : j.items()) {
    if (key == "factors") cfg.factors = get_as<int>(j, key);
    else if (key == "learning_rate") cfg.learning_rate = get_as<double>(j, key);
    else if (key == "beta") cfg.weight_decay = get_as<double>(j, key);
    else if (key == "lambda") cfg.explain_weight = get_as<double>(j, key);
    else if (key == "delta") cfg.novelty_weight = get_as<double>(j, key);
    else if (key == "norm") cfg.norm = parse_constraint_norm(get_as<std::string>(j, key));
    else if (key == "epochs") cfg.epochs = get_as<int>(j, key);
    else if (key == "seed") cfg.seed = get_as<std::uint64_t>(j, key);
    else if (key == "init_scale") cfg.init_scale = get_as<double>(j, key);
    else if (key == "early_stop") cfg.early_stop = get_as<double>(j, key);
  }
}

json train_to_json(const TrainConfig& c) {
  return json{{"factors", c.factors},         {"learning_rate", c.learning_rate},
              {"beta", c.weight_decay},       {"lambda", c.explain_weight},
              {"delta", c.novelty_weight},    {"norm", std::string(to_string(c.norm))},
              {"epochs", c.epochs},           {"seed", c.seed},
              {"init_scale", c.init_scale},   {"early_stop", c.early_stop}};
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key) && !is_train_key(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

std::string format_number(double x) {
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

std::vector<double> json_numbers(const json& j, const std::string& key) {
  std::vector<double> out;
  for (const auto& v : j.at(key)) out.push_back(v.get<double>());
  return out;
}

std::optional<double> json_opt(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// Probe split as its own matrix, same index space as the training split.
RatingMatrix probe_matrix(const Dataset& dataset, const Fold& fold) {
  return dataset.ratings.matrix.subset(fold.probe);
}

double harmonic_mean(std::span<const double> xs) {
  double inv = 0.0;
  for (double x : xs) {
    if (!(x > 0.0)) return 0.0;
    inv += 1.0 / x;
  }
  return static_cast<double>(xs.size()) / inv;
}

}  // namespace

// ---------------------------------------------------------------------------

Reranker parse_reranker(std::string_view name) {
  if (name == "none" || name.empty()) return Reranker::kNone;
  if (name == "mmr") return Reranker::kMmr;
  throw ConfigError("unknown reranker '" + std::string(name) + "' (expected none or mmr)");
}

std::string_view to_string(Reranker reranker) {
  return reranker == Reranker::kMmr ? "mmr" : "none";
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "lambda") return SweepParam::kLambda;
  if (name == "delta") return SweepParam::kDelta;
  if (name == "both") return SweepParam::kBoth;
  throw ConfigError("unknown sweep parameter '" + std::string(name) +
                    "' (expected lambda, delta or both)");
}

std::string_view to_string(SweepParam param) {
  switch (param) {
    case SweepParam::kLambda: return "lambda";
    case SweepParam::kDelta: return "delta";
    case SweepParam::kBoth: return "both";
  }
  return "?";
}

void ExperimentSpec::validate() const {
  if (folds < 2) throw ConfigError("folds must be >= 2");
  if (cells.empty() && !tradeoff) throw ConfigError("experiment has no cells");
  std::set<std::string> names;
  for (const auto& c : cells) {
    if (c.name.empty()) throw ConfigError("every cell needs a name");
    if (!names.insert(c.name).second) throw ConfigError("duplicate cell name '" + c.name + "'");
    c.train.validate();
    if (c.reranker == Reranker::kMmr) {
      if (!(c.mmr_lambda >= 0.0 && c.mmr_lambda <= 1.0)) {
        throw ConfigError("cell '" + c.name + "': MMR trade-off must lie in [0, 1]");
      }
      if (c.mmr_pool < metrics.list_size) {
        throw ConfigError("cell '" + c.name + "': MMR pool smaller than the list size");
      }
    }
  }
  if (tradeoff) {
    if (!names.insert(tradeoff->name).second) {
      throw ConfigError("duplicate cell name '" + tradeoff->name + "'");
    }
    if (tradeoff->lambdas.empty() || tradeoff->deltas.empty()) {
      throw ConfigError("tradeoff sweep needs non-empty lambda and delta lists");
    }
    tradeoff->base.validate();
  }
  if (!baseline.empty() && !names.count(baseline)) {
    throw ConfigError("baseline '" + baseline + "' is not a cell");
  }
  for (int f : only_folds) {
    if (f < 0 || f >= folds) throw ConfigError("fold index " + std::to_string(f) + " out of range");
  }
  if (metrics.list_size < 1) throw ConfigError("list size N must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

ExperimentSpec parse_experiment_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("experiment config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"name", "dataset", "format", "folds", "only_folds", "master_seed", "workers",
                  "output_dir", "baseline", "metrics", "defaults", "cells", "tradeoff"},
                 "experiment config");
  ExperimentSpec spec;
  if (j.contains("name")) spec.name = get_as<std::string>(j, "name");
  if (j.contains("dataset")) spec.dataset = get_as<std::string>(j, "dataset");
  if (j.contains("format")) spec.format = parse_dataset_format(get_as<std::string>(j, "format"));
  if (j.contains("folds")) spec.folds = get_as<int>(j, "folds");
  if (j.contains("only_folds")) spec.only_folds = get_as<std::vector<int>>(j, "only_folds");
  if (j.contains("master_seed")) spec.master_seed = get_as<std::uint64_t>(j, "master_seed");
  if (j.contains("workers")) spec.workers = get_as<int>(j, "workers");
  if (j.contains("output_dir")) spec.output_dir = get_as<std::string>(j, "output_dir");
  if (j.contains("baseline")) spec.baseline = get_as<std::string>(j, "baseline");
  if (j.contains("metrics")) {
    const json& m = j["metrics"];
    for (const auto& [key, value] : m.items()) {
      if (key == "list_size") spec.metrics.list_size = get_as<std::size_t>(m, key);
      else if (key == "k") spec.metrics.explain.k = get_as<int>(m, key);
      else if (key == "positive_threshold") spec.metrics.explain.positive_threshold = get_as<int>(m, key);
      else if (key == "relevance_threshold") spec.metrics.relevance_threshold = get_as<int>(m, key);
      else if (key == "mep_threshold") spec.metrics.mep_threshold = get_as<double>(m, key);
      else if (key == "novelty") spec.metrics.novelty = parse_novelty_kind(get_as<std::string>(m, key));
      else throw ConfigError("unknown key '" + key + "' in metrics");
    }
  }
  TrainConfig defaults;
  if (j.contains("defaults")) {
    reject_unknown(j["defaults"], {}, "defaults");
    apply_train_keys(j["defaults"], defaults);
  }
  if (j.contains("cells")) {
    for (const json& c : j["cells"]) {
      reject_unknown(c, {"name", "reranker", "mmr_lambda", "mmr_pool"}, "cell");
      CellSpec cell;
      cell.name = get_as<std::string>(c, "name");
      cell.train = defaults;
      apply_train_keys(c, cell.train);
      if (c.contains("reranker")) cell.reranker = parse_reranker(get_as<std::string>(c, "reranker"));
      if (c.contains("mmr_lambda")) cell.mmr_lambda = get_as<double>(c, "mmr_lambda");
      if (c.contains("mmr_pool")) cell.mmr_pool = get_as<std::size_t>(c, "mmr_pool");
      spec.cells.push_back(std::move(cell));
    }
  }
  if (j.contains("tradeoff")) {
    const json& t = j["tradeoff"];
    reject_unknown(t, {"name", "lambdas", "deltas"}, "tradeoff");
    TradeoffSweep sweep;
    if (t.contains("name")) sweep.name = get_as<std::string>(t, "name");
    sweep.base = defaults;
    apply_train_keys(t, sweep.base);
    try {
      sweep.lambdas = json_numbers(t, "lambdas");
      sweep.deltas = json_numbers(t, "deltas");
    } catch (const json::exception& e) {
      throw ConfigError(std::string("tradeoff lambdas/deltas: ") + e.what());
    }
    spec.tradeoff = std::move(sweep);
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentSpec spec = parse_experiment_spec(buf.str());
  // Relative paths in a config file are relative to the file.
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  if (!spec.dataset.empty() && spec.dataset.is_relative()) spec.dataset = base / spec.dataset;
  if (!spec.output_dir.empty() && spec.output_dir.is_relative()) spec.output_dir = base / spec.output_dir;
  return spec;
}

std::string experiment_spec_to_json(const ExperimentSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["dataset"] = spec.dataset.string();
  j["format"] = std::string(to_string(spec.format));
  j["folds"] = spec.folds;
  j["only_folds"] = spec.only_folds;
  j["master_seed"] = spec.master_seed;
  j["workers"] = spec.workers;
  j["output_dir"] = spec.output_dir.string();
  j["baseline"] = spec.baseline.empty() && !spec.cells.empty() ? spec.cells.front().name : spec.baseline;
  j["metrics"] = {{"list_size", spec.metrics.list_size},
                  {"k", spec.metrics.explain.k},
                  {"positive_threshold", spec.metrics.explain.positive_threshold},
                  {"relevance_threshold", spec.metrics.relevance_threshold},
                  {"mep_threshold", spec.metrics.mep_threshold},
                  {"novelty", std::string(to_string(spec.metrics.novelty))}};
  j["cells"] = json::array();
  for (const auto& c : spec.cells) {
    json cell = train_to_json(c.train);
    cell["name"] = c.name;
    cell["reranker"] = std::string(to_string(c.reranker));
    cell["mmr_lambda"] = c.mmr_lambda;
    cell["mmr_pool"] = c.mmr_pool;
    j["cells"].push_back(std::move(cell));
  }
  if (spec.tradeoff) {
    json t = train_to_json(spec.tradeoff->base);
    t["name"] = spec.tradeoff->name;
    t["lambdas"] = spec.tradeoff->lambdas;
    t["deltas"] = spec.tradeoff->deltas;
    j["tradeoff"] = std::move(t);
  }
  return j.dump(2) + "\n";
}

const CellResult& EvalReport::cell(std::string_view name) const {
  for (const auto& c : cells) {
    if (c.name == name) return c;
  }
  throw LookupError("no cell named '" + std::string(name) + "' in report");
}

// ---------------------------------------------------------------------------
// Folds and evaluation

FoldContext prepare_fold(const Dataset& dataset, const Fold& fold, int index,
                         const MetricConfig& metrics, int workers) {
  FoldContext ctx;
  ctx.index = index;
  ctx.train = dataset.ratings.matrix.subset(fold.train);
  ctx.probe = probe_matrix(dataset, fold);
  ctx.graph = build_user_graph(ctx.train, metrics.explain.k, workers);
  ctx.explain_raw = build_user_style_E(ctx.train, ctx.graph, metrics.explain, workers);
  ctx.explain_train = normalize(ctx.explain_raw, metrics.explain, ctx.train.scale());
  ctx.novelty_raw = build_N_matrix(ctx.train, dataset.catalog, metrics.novelty, workers);
  ctx.novelty_train = training_novelty(ctx.novelty_raw, ctx.train);
  ctx.novelty_model.emplace(ctx.train, dataset.catalog, metrics.novelty);
  return ctx;
}

MetricValues evaluate_model(const FactorModel& model, const FoldContext& ctx,
                            const Dataset& dataset, const CellSpec& cell,
                            const MetricConfig& metrics) {
  MetricValues sum;
  std::size_t users = 0;
  const std::size_t n = metrics.list_size;
  for (std::uint32_t u = 0; u < ctx.probe.n_users(); ++u) {
    if (ctx.probe.user_row(u).empty()) continue;
    RankedList list = cell.reranker == Reranker::kMmr
                          ? mmr_rerank(top_n(model, ctx.train, u, cell.mmr_pool),
                                       dataset.catalog, n, cell.mmr_lambda)
                          : top_n(model, ctx.train, u, n);
    list.requested = n;
    const RelevantSet relevant = relevant_items(ctx.probe, u, metrics.relevance_threshold);
    sum[0] += precision_at_n(list, relevant);
    sum[1] += accuracy_ndcg(list, relevant);
    sum[2] += mep(list, ctx.explain_raw, metrics.mep_threshold);
    sum[3] += e_ndcg(list, ctx.explain_raw, metrics.explain, ctx.train.scale());
    sum[4] += n_ndcg(list, *ctx.novelty_model);
    ++users;
  }
  if (users > 0) {
    for (double& v : sum.values) v /= static_cast<double>(users);
  }
  return sum;
}

EvalReport run_experiment(const ExperimentSpec& spec, const Dataset& dataset,
                          const FoldObserver& observer) {
  spec.validate();
  const FoldSpec folds = kfold_split(dataset.ratings.matrix, spec.folds, spec.master_seed);
  std::vector<int> fold_ids = spec.only_folds;
  if (fold_ids.empty()) {
    for (int f = 0; f < spec.folds; ++f) fold_ids.push_back(f);
  }

  // Cells actually trained: the declared ones plus the tradeoff grid.
  std::vector<CellSpec> cells = spec.cells;
  std::vector<std::pair<double, double>> grid;
  const std::size_t grid_start = cells.size();
  if (spec.tradeoff) {
    for (double l : spec.tradeoff->lambdas) {
      for (double d : spec.tradeoff->deltas) {
        CellSpec c;
        c.name = spec.tradeoff->name + "[lambda=" + format_number(l) + ",delta=" + format_number(d) + "]";
        c.train = spec.tradeoff->base;
        c.train.explain_weight = l;
        c.train.novelty_weight = d;
        cells.push_back(std::move(c));
        grid.emplace_back(l, d);
      }
    }
  }

  std::vector<FoldContext> contexts(fold_ids.size());
  parallel_for(fold_ids.size(), spec.workers, [&](std::size_t f) {
    const auto idx = static_cast<std::size_t>(fold_ids[f]);
    contexts[f] = prepare_fold(dataset, folds.folds[idx], fold_ids[f], spec.metrics);
  });
  if (observer) {
    for (const auto& ctx : contexts) observer(ctx);
  }

  struct JobResult {
    bool failed = false;
    std::string error;
    MetricValues values;
    std::vector<double> rmse;
  };
  const std::size_t n_jobs = cells.size() * contexts.size();
  std::vector<JobResult> jobs(n_jobs);
  parallel_for(n_jobs, spec.workers, [&](std::size_t job) {
    const CellSpec& cell = cells[job / contexts.size()];
    const FoldContext& ctx = contexts[job % contexts.size()];
    TrainConfig cfg = cell.train;
    cfg.seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(ctx.index), cell.name);
    try {
      const FactorModel model = train(ctx.train, &ctx.explain_train, &ctx.novelty_train, cfg);
      jobs[job].values = evaluate_model(model, ctx, dataset, cell, spec.metrics);
      jobs[job].rmse = model.rmse_log();
    } catch (const DivergenceError& e) {
      jobs[job].failed = true;
      jobs[job].error = e.what();
    }
  });

  std::vector<CellResult> results(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellResult& r = results[c];
    r.name = cells[c].name;
    for (std::size_t f = 0; f < contexts.size(); ++f) {
      const JobResult& job = jobs[c * contexts.size() + f];
      if (job.failed) {
        r.failed = true;
        r.error = job.error;
      }
      r.folds.push_back(job.values);
      r.rmse_logs.push_back(job.rmse);
    }
    if (!r.failed) {
      for (const auto& fv : r.folds) {
        for (std::size_t m = 0; m < kMetricNames.size(); ++m) r.mean[m] += fv[m];
      }
      for (double& v : r.mean.values) v /= static_cast<double>(r.folds.size());
    }
  }

  EvalReport report;
  report.experiment = spec.name;
  report.folds = fold_ids;
  report.cells.assign(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(grid_start));
  if (spec.tradeoff) {
    SweepTable table{SweepParam::kBoth, {}};
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const CellResult& r = results[grid_start + g];
      table.rows.push_back({grid[g].first, grid[g].second, r.failed, r.mean});
    }
    CellResult chosen = results[grid_start + select_tradeoff(table)];
    chosen.description = chosen.name.substr(spec.tradeoff->name.size());
    chosen.name = spec.tradeoff->name;
    report.cells.push_back(std::move(chosen));
  }
  report.baseline = spec.baseline.empty() ? report.cells.front().name : spec.baseline;

  const CellResult& base = report.cell(report.baseline);
  for (auto& r : report.cells) {
    if (r.name == base.name || r.failed || base.failed || r.folds.size() < 2) continue;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      std::vector<double> a, b;
      for (std::size_t f = 0; f < r.folds.size(); ++f) {
        a.push_back(r.folds[f][m]);
        b.push_back(base.folds[f][m]);
      }
      r.p_values[m] = paired_t_test(a, b);
    }
  }

  if (!spec.output_dir.empty()) {
    const auto& out = spec.output_dir;
    write_text(out / "resolved_config.json", experiment_spec_to_json(spec));
    write_text(out / "report.json", report_to_json(report));
    write_text(out / "report.csv", report_to_csv(report));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      for (std::size_t f = 0; f < contexts.size(); ++f) {
        std::ostringstream log;
        log << "epoch,rmse\n" << std::setprecision(10);
        const auto& rmse = results[c].rmse_logs[f];
        for (std::size_t e = 0; e < rmse.size(); ++e) log << e + 1 << ',' << rmse[e] << '\n';
        write_text(out / "logs" / (cells[c].name + "_fold" + std::to_string(contexts[f].index) + ".csv"),
                   log.str());
      }
    }
  }
  return report;
}

EvalReport run_experiment(const ExperimentSpec& spec) {
  if (spec.dataset.empty()) throw ConfigError("experiment config names no dataset");
  const Dataset dataset = load_dataset(spec.dataset, spec.format);
  return run_experiment(spec, dataset);
}

// ---------------------------------------------------------------------------
// Sweeps

SweepTable sensitivity_sweep(const ExperimentSpec& spec, const Dataset& dataset, SweepParam param,
                             std::span<const double> values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("sweep values must be finite and >= 0");
  }
  if (spec.cells.empty()) throw ConfigError("sweep needs a base cell");
  const CellSpec& base = spec.cells.front();
  ExperimentSpec sweep = spec;
  sweep.cells.clear();
  sweep.tradeoff.reset();
  sweep.baseline.clear();
  sweep.output_dir.clear();
  std::vector<std::pair<double, double>> points;
  auto add = [&](double l, double d) {
    CellSpec c = base;
    c.train.explain_weight = l;
    c.train.novelty_weight = d;
    c.name = base.name + "[lambda=" + format_number(l) + ",delta=" + format_number(d) + "]";
    sweep.cells.push_back(std::move(c));
    points.emplace_back(l, d);
  };
  for (double v : values) {
    if (param == SweepParam::kLambda) {
      add(v, base.train.novelty_weight);
    } else if (param == SweepParam::kDelta) {
      add(base.train.explain_weight, v);
    } else {
      for (double d : values) add(v, d);
    }
  }
  const EvalReport report = run_experiment(sweep, dataset);
  SweepTable table{param, {}};
  for (std::size_t p = 0; p < points.size(); ++p) {
    const CellResult& r = report.cells[p];
    table.rows.push_back({points[p].first, points[p].second, r.failed, r.mean});
  }
  if (!spec.output_dir.empty()) {
    const std::string stem = "sweep_" + std::string(to_string(param));
    write_text(spec.output_dir / (stem + ".csv"), sweep_to_csv(table));
    write_text(spec.output_dir / (stem + "_long.csv"), sweep_to_long_csv(table));
    write_text(spec.output_dir / "resolved_config.json", experiment_spec_to_json(spec));
  }
  return table;
}

std::size_t select_tradeoff(const SweepTable& table) {
  // ndcg, e_ndcg, n_ndcg
  constexpr std::array<std::size_t, 3> kColumns = {1, 3, 4};
  std::array<double, 3> best{};
  for (const auto& row : table.rows) {
    if (row.failed) continue;
    for (std::size_t c = 0; c < 3; ++c) best[c] = std::max(best[c], row.mean[kColumns[c]]);
  }
  std::size_t chosen = table.rows.size();
  double chosen_score = -1.0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].failed) continue;
    std::array<double, 3> normalized{};
    for (std::size_t c = 0; c < 3; ++c) {
      normalized[c] = best[c] > 0.0 ? table.rows[r].mean[kColumns[c]] / best[c] : 0.0;
    }
    const double score = harmonic_mean(normalized);
    if (score > chosen_score) {
      chosen = r;
      chosen_score = score;
    }
  }
  if (chosen == table.rows.size()) throw Error("every tradeoff grid cell failed");
  return chosen;
}

// ---------------------------------------------------------------------------
// Rendering

std::string compare_table(const EvalReport& report) {
  static constexpr std::array<std::string_view, 5> kHeaders = {"Prec.", "nDCG", "MEP", "E-nDCG",
                                                               "N-nDCG"};
  std::array<double, 5> best;
  best.fill(-std::numeric_limits<double>::infinity());
  for (const auto& c : report.cells) {
    if (c.failed) continue;
    for (std::size_t m = 0; m < 5; ++m) best[m] = std::max(best[m], c.mean[m]);
  }
  std::size_t width = 9;
  for (const auto& c : report.cells) width = std::max(width, c.name.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "Algorithm";
  for (auto h : kHeaders) out << "  " << std::right << std::setw(9) << h;
  out << '\n';
  for (const auto& c : report.cells) {
    out << std::left << std::setw(static_cast<int>(width)) << c.name;
    if (c.failed) {
      out << "  FAILED (" << c.error << ")\n";
      continue;
    }
    for (std::size_t m = 0; m < 5; ++m) {
      std::ostringstream cellv;
      cellv << std::fixed << std::setprecision(2) << 100.0 * c.mean[m] << '%'
            << (c.mean[m] == best[m] ? "*" : " ");
      out << "  " << std::right << std::setw(9) << cellv.str();
    }
    if (!c.description.empty()) out << "  " << c.description;
    out << '\n';
  }
  return out.str();
}

std::string report_to_json(const EvalReport& report) {
  json j;
  j["experiment"] = report.experiment;
  j["folds"] = report.folds;
  j["fold_count"] = report.folds.size();
  j["baseline"] = report.baseline;
  j["metrics"] = std::vector<std::string>(kMetricNames.begin(), kMetricNames.end());
  j["cells"] = json::array();
  for (const auto& c : report.cells) {
    json cell;
    cell["name"] = c.name;
    cell["description"] = c.description;
    cell["failed"] = c.failed;
    cell["error"] = c.error;
    json folds = json::array();
    for (const auto& f : c.folds) folds.push_back(f.values);
    cell["per_fold"] = std::move(folds);
    cell["mean"] = c.mean.values;
    json p = json::array();
    for (const auto& v : c.p_values) p.push_back(v ? json(*v) : json(nullptr));
    cell["p_values"] = std::move(p);
    j["cells"].push_back(std::move(cell));
  }
  return j.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view json_text) {
  EvalReport report;
  try {
    const json j = json::parse(json_text);
    report.experiment = j.at("experiment").get<std::string>();
    report.folds = j.at("folds").get<std::vector<int>>();
    report.baseline = j.at("baseline").get<std::string>();
    for (const json& c : j.at("cells")) {
      CellResult r;
      r.name = c.at("name").get<std::string>();
      r.description = c.value("description", "");
      r.failed = c.at("failed").get<bool>();
      r.error = c.value("error", "");
      for (const json& f : c.at("per_fold")) {
        MetricValues v;
        v.values = f.get<std::array<double, 5>>();
        r.folds.push_back(v);
      }
      r.mean.values = c.at("mean").get<std::array<double, 5>>();
      const json& p = c.at("p_values");
      for (std::size_t m = 0; m < 5 && m < p.size(); ++m) r.p_values[m] = json_opt(p[m]);
      report.cells.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("report is not valid: ") + e.what());
  }
  return report;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "algorithm,fold,metric,value\n" << std::setprecision(10);
  for (const auto& c : report.cells) {
    for (std::size_t f = 0; f < c.folds.size(); ++f) {
      for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
        out << c.name << ',' << report.folds[f] << ',' << kMetricNames[m] << ',';
        if (c.failed) out << "nan\n";
        else out << c.folds[f][m] << '\n';
      }
    }
  }
  return out.str();
}

std::string sweep_to_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "lambda,delta";
  for (auto m : kMetricNames) out << ',' << m;
  out << ",failed\n" << std::setprecision(10);
  for (const auto& r : table.rows) {
    out << r.lambda << ',' << r.delta;
    for (double v : r.mean.values) out << ',' << v;
    out << ',' << (r.failed ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string sweep_to_long_csv(const SweepTable& table) {
  std::ostringstream out;
  out << std::setprecision(10);
  if (table.param == SweepParam::kBoth) out << "lambda,delta,series,value\n";
  else out << to_string(table.param) << ",series,value\n";
  for (const auto& r : table.rows) {
    if (r.failed) continue;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      if (table.param == SweepParam::kBoth) out << r.lambda << ',' << r.delta;
      else out << (table.param == SweepParam::kLambda ? r.lambda : r.delta);
      out << ',' << kMetricNames[m] << ',' << r.mean[m] << '\n';
    }
  }
  return out.str();
}

}  // namespace nemf
