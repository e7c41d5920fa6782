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
// nemf: command line front end for offline experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nemf/dataset.hpp"
#include "nemf/errors.hpp"
#include "nemf/explainability.hpp"
#include "nemf/factorization.hpp"
#include "nemf/harness.hpp"
#include "nemf/neighborhood.hpp"
#include "nemf/novelty.hpp"
#include "nemf/ranking.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flag values shared by the subcommands. Every flag has a default; a config
// file, when given, overrides them.
struct Flags {
  std::string dataset;
  std::string format = "ml100k";
  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  std::size_t list_size = 10;
  int k = 10;
  int positive_threshold = 4;
  double lambda = 0.0;
  double delta = 0.0;
  double beta = 0.02;
  double eta = 0.001;
  int factors = 0;  // 0: 80 for ml100k, 50 for ml1m
  int epochs = 100;
  std::string norm = "l1";
  std::string novelty = "distance";
  std::string reranker = "none";
  double mmr_lambda = 0.5;
  int folds = 4;
  int workers = 1;
  CLI::Option* seed_opt = nullptr;
};

fs::path output_dir(const Flags& f) {
  if (!f.output.empty()) return f.output;
  if (const char* env = std::getenv("NEMF_OUTPUT_DIR"); env && *env) return env;
  return "nemf_out";
}

int default_factors(const std::string& format) {
  return nemf::parse_dataset_format(format) == nemf::DatasetFormat::kMl1m ? 50 : 80;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw nemf::ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw nemf::ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
}

// Experiment config from the flags, with the config file merged over it.
nemf::ExperimentSpec resolve_spec(const Flags& f, bool single_cell) {
  json j;
  j["name"] = "cli";
  j["format"] = f.format;
  j["folds"] = f.folds;
  j["workers"] = f.workers;
  j["metrics"] = {{"list_size", f.list_size},
                  {"k", f.k},
                  {"positive_threshold", f.positive_threshold},
                  {"novelty", f.novelty}};
  j["defaults"] = {{"lambda", f.lambda}, {"delta", f.delta}, {"beta", f.beta},
                   {"learning_rate", f.eta}, {"epochs", f.epochs}, {"norm", f.norm}};
  if (f.factors > 0) j["defaults"]["factors"] = f.factors;
  if (f.seed_opt->count() > 0) {
    j["master_seed"] = f.seed;
    j["defaults"]["seed"] = f.seed;
  }
  if (!f.dataset.empty()) j["dataset"] = f.dataset;

  fs::path config_dir;
  if (!f.config.empty()) {
    json file = read_json(f.config);
    config_dir = fs::path(f.config).parent_path();
    // Paths in the file are relative to the file.
    for (const char* key : {"dataset", "output_dir"}) {
      if (file.contains(key) && file[key].is_string() && fs::path(file[key].get<std::string>()).is_relative()) {
        file[key] = (config_dir / file[key].get<std::string>()).lexically_normal().string();
      }
    }
    j.merge_patch(file);
  }
  if (!j["defaults"].contains("factors")) {
    j["defaults"]["factors"] = default_factors(j["format"].get<std::string>());
  }
  if (single_cell && !j.contains("cells") && !j.contains("tradeoff")) {
    j["cells"] = json::array({{{"name", "model"}, {"reranker", f.reranker}, {"mmr_lambda", f.mmr_lambda}}});
  }
  nemf::ExperimentSpec spec = nemf::parse_experiment_spec(j.dump());
  if (spec.dataset.empty()) throw nemf::ConfigError("no dataset given (use --dataset or a config file)");
  if (spec.output_dir.empty()) spec.output_dir = output_dir(f);
  return spec;
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw nemf::Error("cannot write " + path.string());
  out << text;
}

nemf::Dataset load(const nemf::ExperimentSpec& spec) {
  return nemf::load_dataset(spec.dataset, spec.format);
}

void add_dataset_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("-d,--dataset", f.dataset, "Dataset directory (u.data/u.item or ratings.dat/movies.dat)");
  cmd->add_option("--format", f.format, "Dataset format: ml100k or ml1m")->capture_default_str();
  cmd->add_option("-c,--config", f.config, "JSON config file; its values override flags");
  cmd->add_option("-o,--output", f.output, "Output directory (default $NEMF_OUTPUT_DIR or ./nemf_out)");
}

void add_model_flags(CLI::App* cmd, Flags& f) {
  f.seed_opt = cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--lambda", f.lambda, "Explainability constraint weight")->capture_default_str();
  cmd->add_option("--delta", f.delta, "Novelty constraint weight")->capture_default_str();
  cmd->add_option("--beta", f.beta, "L2 weight decay")->capture_default_str();
  cmd->add_option("--eta", f.eta, "Learning rate")->capture_default_str();
  cmd->add_option("--factors", f.factors, "Latent factors (default 80 for ml100k, 50 for ml1m)");
  cmd->add_option("--epochs", f.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--norm", f.norm, "Constraint norm: l1 or l2")->capture_default_str();
  cmd->add_option("-k,--neighbors", f.k, "Neighbourhood size")->capture_default_str();
  cmd->add_option("--ptau", f.positive_threshold, "Positive rating threshold")->capture_default_str();
  cmd->add_option("--novelty", f.novelty, "Novelty: distance, popularity or topic")->capture_default_str();
}

void add_list_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("-n,--top", f.list_size, "Recommendation list size N")->capture_default_str();
  cmd->add_option("--reranker", f.reranker, "none or mmr")->capture_default_str();
  cmd->add_option("--mmr-lambda", f.mmr_lambda, "MMR relevance/diversity trade-off")->capture_default_str();
}

void add_experiment_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--folds", f.folds, "Cross-validation folds")->capture_default_str();
  cmd->add_option("--workers", f.workers, "Parallel workers")->capture_default_str();
}

// Side matrices for a model trained on the whole data set.
struct Sides {
  nemf::SideMatrix explain;
  nemf::SideMatrix novelty;
};

Sides build_sides(const nemf::Dataset& data, const nemf::ExperimentSpec& spec, int workers) {
  const auto& m = data.ratings.matrix;
  const auto graph = nemf::build_user_graph(m, spec.metrics.explain.k, workers);
  const auto raw = nemf::build_user_style_E(m, graph, spec.metrics.explain, workers);
  const auto n_raw = nemf::build_N_matrix(m, data.catalog, spec.metrics.novelty, workers);
  return {nemf::normalize(raw, spec.metrics.explain, m.scale()), nemf::training_novelty(n_raw, m)};
}

void cmd_ingest(const Flags& f) {
  const auto spec = resolve_spec(f, true);
  const auto data = load(spec);
  const auto& m = data.ratings.matrix;
  json summary = {{"dataset", spec.dataset.string()},
                  {"format", std::string(nemf::to_string(spec.format))},
                  {"ratings", m.size()},
                  {"users", m.n_users()},
                  {"items", m.n_items()},
                  {"catalog_items", data.catalog.size()},
                  {"genres", std::vector<std::string>(data.catalog.genres().begin(), data.catalog.genres().end())},
                  {"average_genres_per_item", data.catalog.average_genres_per_item()},
                  {"density", static_cast<double>(m.size()) / (static_cast<double>(m.n_users()) * m.n_items())}};
  std::cout << summary.dump(2) << '\n';
  write_file(spec.output_dir / "ingest_summary.json", summary.dump(2) + "\n");
  write_file(spec.output_dir / "resolved_config.json", nemf::experiment_spec_to_json(spec));
}

void cmd_train(const Flags& f) {
  const auto spec = resolve_spec(f, true);
  const auto data = load(spec);
  nemf::TrainConfig cfg = spec.cells.front().train;
  if (f.seed_opt->count() == 0 && f.config.empty()) cfg.seed = spec.master_seed;
  const auto& m = data.ratings.matrix;
  std::optional<Sides> sides;
  if (cfg.explain_weight > 0.0 || cfg.novelty_weight > 0.0) sides = build_sides(data, spec, spec.workers);
  const auto model = nemf::train(m, sides ? &sides->explain : nullptr,
                                 sides ? &sides->novelty : nullptr, cfg);
  const auto& out = spec.output_dir;
  fs::create_directories(out);
  nemf::save_model(model, out / "model.txt");
  std::ostringstream log;
  log << "epoch,rmse\n";
  for (std::size_t e = 0; e < model.rmse_log().size(); ++e) log << e + 1 << ',' << model.rmse_log()[e] << '\n';
  write_file(out / "train_log.csv", log.str());
  if (sides) {
    std::ofstream e_out(out / "explainability.txt");
    sides->explain.write_triplets(e_out, &data.ratings.users, &data.ratings.items);
    std::ofstream n_out(out / "novelty.txt");
    sides->novelty.write_triplets(n_out, &data.ratings.users, &data.ratings.items);
  }
  nemf::ExperimentSpec resolved = spec;
  resolved.cells.front().train = cfg;
  write_file(out / "resolved_config.json", nemf::experiment_spec_to_json(resolved));
  std::cout << "trained " << cfg.epochs << " epochs, final train RMSE "
            << (model.rmse_log().empty() ? 0.0 : model.rmse_log().back()) << "\nmodel: "
            << (out / "model.txt").string() << '\n';
}

void cmd_recommend(const Flags& f, const std::string& model_path, const std::vector<std::int64_t>& users) {
  const auto spec = resolve_spec(f, true);
  const auto data = load(spec);
  const auto model = nemf::load_model(model_path);
  const auto& m = data.ratings.matrix;
  if (model.n_users() != m.n_users() || model.n_items() != m.n_items()) {
    throw nemf::ConfigError("model shape does not match the dataset");
  }
  const auto& cell = spec.cells.front();
  std::vector<std::uint32_t> targets;
  if (users.empty()) {
    for (std::uint32_t u = 0; u < m.n_users(); ++u) targets.push_back(u);
  } else {
    for (auto id : users) targets.push_back(data.ratings.users.internal(id));
  }
  std::ostringstream text;
  text << "user item rank score\n";
  for (auto u : targets) {
    const std::size_t n = spec.metrics.list_size;
    const auto list = cell.reranker == nemf::Reranker::kMmr
                          ? nemf::mmr_rerank(nemf::top_n(model, m, u, cell.mmr_pool), data.catalog, n,
                                             cell.mmr_lambda)
                          : nemf::top_n(model, m, u, n);
    nemf::write_recommendations(text, list, data.ratings.users, data.ratings.items);
  }
  if (!users.empty()) std::cout << text.str();
  write_file(spec.output_dir / "recommendations.txt", text.str());
  write_file(spec.output_dir / "resolved_config.json", nemf::experiment_spec_to_json(spec));
}

void cmd_explain(const Flags& f, std::int64_t user, std::int64_t item, const std::string& style,
                 const std::string& model_path) {
  const auto spec = resolve_spec(f, true);
  const auto data = load(spec);
  const auto& m = data.ratings.matrix;
  const auto u = data.ratings.users.internal(user);
  const auto i = data.ratings.items.internal(item);
  const auto& cfg = spec.metrics.explain;
  const auto& title = data.catalog.title(i);
  if (style == "user") {
    const auto graph = nemf::build_user_graph(m, cfg.k, spec.workers);
    std::cout << nemf::render_explanation(nemf::neighbor_histogram(m, graph, u, i), cfg, title);
  } else if (style == "item") {
    const auto graph = nemf::build_item_graph(m, cfg.k, spec.workers);
    const auto reasons = nemf::item_style_reasons(m, graph, cfg, u, i);
    double e = 0.0;
    if (reasons.empty()) {
      std::cout << "No explanation available for " << title
                << ": you have not rated any of its " << cfg.k << " most similar items highly.\n";
    } else {
      std::cout << title << " is recommended because you highly rated:\n";
      for (const auto& r : reasons) {
        std::cout << "  " << data.catalog.title(r.index) << " (" << r.value << ")\n";
        e += r.value;
      }
    }
    std::cout << "E = " << e << " (positive threshold " << cfg.positive_threshold << ", k = " << cfg.k
              << ")\nE normalized = " << e / nemf::explainability_max(cfg, m.scale()) << '\n';
  } else {
    throw nemf::ConfigError("unknown explanation style '" + style + "' (expected user or item)");
  }
  if (!model_path.empty()) {
    const auto model = nemf::load_model(model_path);
    if (model.n_users() != m.n_users() || model.n_items() != m.n_items()) {
      throw nemf::ConfigError("model shape does not match the dataset");
    }
    std::cout << "predicted rating = " << model.predict(u, i) << '\n';
  }
}

void cmd_evaluate(const Flags& f) {
  const auto spec = resolve_spec(f, true);
  const auto report = nemf::run_experiment(spec);
  std::cout << nemf::compare_table(report);
  std::cout << "report: " << (spec.output_dir / "report.json").string() << '\n';
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw nemf::ConfigError("bad sweep value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void cmd_sweep(const Flags& f, const std::string& param, const std::string& values) {
  const auto spec = resolve_spec(f, true);
  const auto kind = nemf::parse_sweep_param(param);
  const auto points = parse_values(values);
  const auto data = load(spec);
  const auto table = nemf::sensitivity_sweep(spec, data, kind, points);
  std::cout << nemf::sweep_to_csv(table);
}

void cmd_compare(const std::vector<std::string>& reports) {
  for (const auto& path : reports) {
    std::ifstream in(path);
    if (!in) throw nemf::ConfigError("cannot open report " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto report = nemf::report_from_json(buf.str());
    std::cout << report.experiment << " (" << report.folds.size() << " folds)\n"
              << nemf::compare_table(report);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainable and novelty-aware matrix factorization toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto* ingest = app.add_subcommand("ingest", "Parse and validate a dataset, print a summary");
  add_dataset_flags(ingest, f);
  f.seed_opt = ingest->add_option("--seed", f.seed, "Random seed");

  auto* train = app.add_subcommand("train", "Train a model on the whole dataset");
  add_dataset_flags(train, f);
  add_model_flags(train, f);
  add_experiment_flags(train, f);

  std::string model_path;
  std::vector<std::int64_t> users;
  auto* recommend = app.add_subcommand("recommend", "Top-N lists from a trained model");
  add_dataset_flags(recommend, f);
  add_list_flags(recommend, f);
  f.seed_opt = recommend->add_option("--seed", f.seed, "Random seed");
  recommend->add_option("-m,--model", model_path, "Model file written by train")->required();
  recommend->add_option("-u,--user", users, "External user ids (default: all users)");

  std::int64_t user = 0, item = 0;
  std::string style = "user";
  auto* explain = app.add_subcommand("explain", "Explain a (user, item) recommendation");
  add_dataset_flags(explain, f);
  explain->add_option("-k,--neighbors", f.k, "Neighbourhood size")->capture_default_str();
  explain->add_option("--ptau", f.positive_threshold, "Positive rating threshold")->capture_default_str();
  explain->add_option("--style", style, "user or item")->capture_default_str();
  explain->add_option("-m,--model", model_path, "Also print the model's predicted rating");
  explain->add_option("-u,--user", user, "External user id")->required();
  explain->add_option("-i,--item", item, "External item id")->required();
  f.seed_opt = explain->add_option("--seed", f.seed, "Random seed");

  auto* evaluate = app.add_subcommand("evaluate", "Cross-validated evaluation of an algorithm grid");
  add_dataset_flags(evaluate, f);
  add_model_flags(evaluate, f);
  add_list_flags(evaluate, f);
  add_experiment_flags(evaluate, f);

  std::string param = "delta", values;
  auto* sweep = app.add_subcommand("sweep", "Sensitivity sweep over lambda, delta or both");
  add_dataset_flags(sweep, f);
  add_model_flags(sweep, f);
  add_list_flags(sweep, f);
  add_experiment_flags(sweep, f);
  sweep->add_option("--param", param, "lambda, delta or both")->capture_default_str();
  sweep->add_option("--values", values, "Comma separated values, e.g. 0,0.2,0.4")->required();

  std::vector<std::string> reports;
  auto* compare = app.add_subcommand("compare", "Print comparison tables for report.json files");
  compare->add_option("reports", reports, "report.json files")->required();

  // Each subcommand registers its own --seed; keep the one that was parsed.
  std::vector<std::pair<CLI::App*, CLI::Option*>> seeds;
  for (auto* cmd : {ingest, train, recommend, explain, evaluate, sweep}) {
    seeds.emplace_back(cmd, cmd->get_option("--seed"));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (auto& [cmd, opt] : seeds) {
      if (cmd->parsed()) f.seed_opt = opt;
    }
    if (ingest->parsed()) cmd_ingest(f);
    else if (train->parsed()) cmd_train(f);
    else if (recommend->parsed()) cmd_recommend(f, model_path, users);
    else if (explain->parsed()) cmd_explain(f, user, item, style, model_path);
    else if (evaluate->parsed()) cmd_evaluate(f);
    else if (sweep->parsed()) cmd_sweep(f, param, values);
    else if (compare->parsed()) cmd_compare(reports);
  } catch (const nemf::Error& e) {
    std::cerr << "nemf: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "nemf: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
