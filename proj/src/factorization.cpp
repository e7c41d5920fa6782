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
#include "nemf/factorization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "nemf/errors.hpp"

namespace nemf {
namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

std::string hex(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double unhex(const std::string& text, const std::filesystem::path& path) {
  double x = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  // to_chars writes "inf"/"nan" for non-finite values and "-..." for negatives.
  const auto res = std::from_chars(first, last, x, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ParseError(path.string() + ": bad number '" + text + "'");
  }
  return x;
}

}  // namespace

ConstraintNorm parse_constraint_norm(std::string_view name) {
  if (name == "l1" || name == "L1" || name == "manhattan") return ConstraintNorm::kL1;
  if (name == "l2" || name == "L2" || name == "euclidean") return ConstraintNorm::kL2;
  throw ConfigError("unknown constraint norm '" + std::string(name) + "' (expected l1 or l2)");
}

std::string_view to_string(ConstraintNorm norm) {
  return norm == ConstraintNorm::kL1 ? "l1" : "l2";
}

void TrainConfig::validate() const {
  if (factors < 1) throw ConfigError("factors must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be > 0");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay (beta) must be >= 0");
  if (!(explain_weight >= 0.0)) throw ConfigError("explainability weight (lambda) must be >= 0");
  if (!(novelty_weight >= 0.0)) throw ConfigError("novelty weight (delta) must be >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1, got " + std::to_string(epochs));
  if (!(init_scale >= 0.0)) throw ConfigError("init scale must be >= 0");
  if (!(early_stop >= 0.0)) throw ConfigError("early-stop tolerance must be >= 0");
}

// ---------------------------------------------------------------------------
// FactorModel

FactorModel::FactorModel(std::size_t n_users, std::size_t n_items, const TrainConfig& config)
    : n_users_(n_users),
      n_items_(n_items),
      config_(config),
      users_(n_users * static_cast<std::size_t>(config.factors), 0.0),
      items_(n_items * static_cast<std::size_t>(config.factors), 0.0) {
  if (config.factors < 1) throw ConfigError("factors must be >= 1");
}

std::span<double> FactorModel::user(std::uint32_t u) {
  if (u >= n_users_) throw LookupError("user index " + std::to_string(u) + " out of range");
  const auto f = static_cast<std::size_t>(config_.factors);
  return {users_.data() + u * f, f};
}

std::span<const double> FactorModel::user(std::uint32_t u) const {
  if (u >= n_users_) throw LookupError("user index " + std::to_string(u) + " out of range");
  const auto f = static_cast<std::size_t>(config_.factors);
  return {users_.data() + u * f, f};
}

std::span<double> FactorModel::item(std::uint32_t i) {
  if (i >= n_items_) throw LookupError("item index " + std::to_string(i) + " out of range");
  const auto f = static_cast<std::size_t>(config_.factors);
  return {items_.data() + i * f, f};
}

std::span<const double> FactorModel::item(std::uint32_t i) const {
  if (i >= n_items_) throw LookupError("item index " + std::to_string(i) + " out of range");
  const auto f = static_cast<std::size_t>(config_.factors);
  return {items_.data() + i * f, f};
}

double FactorModel::predict(std::uint32_t u, std::uint32_t i) const {
  return dot(user(u), item(i));
}

bool FactorModel::all_finite() const {
  for (double x : users_) if (!std::isfinite(x)) return false;
  for (double x : items_) if (!std::isfinite(x)) return false;
  return true;
}

FactorModel init_model(const TrainConfig& cfg, std::size_t n_users, std::size_t n_items) {
  FactorModel model(n_users, n_items, cfg);
  Rng rng(cfg.seed);
  for (std::uint32_t u = 0; u < n_users; ++u) {
    for (double& x : model.user(u)) x = uniform_unit(rng) * cfg.init_scale;
  }
  for (std::uint32_t i = 0; i < n_items; ++i) {
    for (double& x : model.item(i)) x = uniform_unit(rng) * cfg.init_scale;
  }
  return model;
}

Rng shuffle_stream(const TrainConfig& cfg) {
  return Rng(splitmix64(cfg.seed ^ 0x5bd1e9955bd1e995ULL));
}

SideWeights align_side_weights(std::span<const Rating> triplets, const SideMatrix* explain,
                               const SideMatrix* novelty) {
  SideWeights w;
  w.explain = explain ? explain->gather(triplets) : std::vector<double>(triplets.size(), 0.0);
  w.novelty = novelty ? novelty->gather(triplets) : std::vector<double>(triplets.size(), 0.0);
  return w;
}

// ---------------------------------------------------------------------------
// SGD

double sgd_step(std::span<double> user, std::span<double> item, double rating,
                double explain, double novelty, const TrainConfig& cfg) {
  const double err = rating - dot(user, item);
  const double w = cfg.explain_weight * explain + cfg.novelty_weight * novelty;
  const double eta = cfg.learning_rate;
  const double beta = cfg.weight_decay;
  const bool l1 = cfg.norm == ConstraintNorm::kL1;
  for (std::size_t k = 0; k < user.size(); ++k) {
    const double pu = user[k];
    const double qi = item[k];
    const double diff = pu - qi;
    const double c_user = l1 ? sgn(diff) * w : diff * w;
    const double c_item = l1 ? c_user : -c_user;
    user[k] = pu + eta * (2.0 * err * qi - beta * pu - c_user);
    item[k] = qi + eta * (2.0 * err * pu - beta * qi - c_item);
  }
  return err;
}

double sgd_epoch(FactorModel& model, std::span<const Rating> ratings,
                 std::span<const std::size_t> order, const SideWeights& weights,
                 const TrainConfig& cfg, int epoch) {
  if (weights.explain.size() != ratings.size() || weights.novelty.size() != ratings.size()) {
    throw ConfigError("side weights are not aligned with the ratings");
  }
  double sq = 0.0;
  for (std::size_t t : order) {
    const Rating& r = ratings[t];
    const double err = sgd_step(model.user(r.user), model.item(r.item), r.value,
                                weights.explain[t], weights.novelty[t], cfg);
    sq += err * err;
  }
  if (!model.all_finite() || !std::isfinite(sq)) {
    throw DivergenceError(epoch, "training diverged at epoch " + std::to_string(epoch) +
                                     " (non-finite factors)");
  }
  return order.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(order.size()));
}

FactorModel train(const RatingMatrix& ratings, const SideMatrix* explain,
                  const SideMatrix* novelty, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.explain_weight > 0.0 && explain == nullptr) {
    throw ConfigError("explainability weight set but no explainability matrix given");
  }
  if (cfg.novelty_weight > 0.0 && novelty == nullptr) {
    throw ConfigError("novelty weight set but no novelty matrix given");
  }
  const auto triplets = ratings.triplets();
  const SideWeights weights = align_side_weights(triplets, explain, novelty);
  FactorModel model = init_model(cfg, ratings.n_users(), ratings.n_items());
  Rng order_rng = shuffle_stream(cfg);
  std::vector<std::size_t> order(triplets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), order_rng);
    const double rmse = sgd_epoch(model, triplets, order, weights, cfg, epoch);
    const auto& log = model.rmse_log();
    const bool converged = cfg.early_stop > 0.0 && !log.empty() &&
                           std::abs(log.back() - rmse) < cfg.early_stop;
    model.append_rmse(rmse);
    if (converged) break;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Objective and gradient

double pair_objective(std::span<const double> user, std::span<const double> item,
                      double rating, double explain, double novelty, const TrainConfig& cfg) {
  const double err = rating - dot(user, item);
  const double w = cfg.explain_weight * explain + cfg.novelty_weight * novelty;
  double norms = 0.0, constraint = 0.0;
  for (std::size_t k = 0; k < user.size(); ++k) {
    norms += user[k] * user[k] + item[k] * item[k];
    const double d = user[k] - item[k];
    constraint += cfg.norm == ConstraintNorm::kL1 ? std::abs(d) : 0.5 * d * d;
  }
  return err * err + 0.5 * cfg.weight_decay * norms + w * constraint;
}

PairGradient pair_gradient(std::span<const double> user, std::span<const double> item,
                           double rating, double explain, double novelty,
                           const TrainConfig& cfg) {
  const double err = rating - dot(user, item);
  const double w = cfg.explain_weight * explain + cfg.novelty_weight * novelty;
  PairGradient g{std::vector<double>(user.size()), std::vector<double>(item.size())};
  for (std::size_t k = 0; k < user.size(); ++k) {
    const double d = user[k] - item[k];
    const double c = cfg.norm == ConstraintNorm::kL1 ? sgn(d) : d;
    g.user[k] = -2.0 * err * item[k] + cfg.weight_decay * user[k] + w * c;
    g.item[k] = -2.0 * err * user[k] + cfg.weight_decay * item[k] - w * c;
  }
  return g;
}

double objective(const FactorModel& model, std::span<const Rating> ratings,
                 const SideMatrix* explain, const SideMatrix* novelty, const TrainConfig& cfg) {
  double total = 0.0;
  for (const Rating& r : ratings) {
    total += pair_objective(model.user(r.user), model.item(r.item), r.value,
                            explain ? explain->at(r.user, r.item) : 0.0,
                            novelty ? novelty->at(r.user, r.item) : 0.0, cfg);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Persistence

void save_model(const FactorModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const TrainConfig& c = model.config();
  out << "nemf-model 1\n"
      << "users " << model.n_users() << "\n"
      << "items " << model.n_items() << "\n"
      << "factors " << c.factors << "\n"
      << "learning_rate " << hex(c.learning_rate) << "\n"
      << "weight_decay " << hex(c.weight_decay) << "\n"
      << "explain_weight " << hex(c.explain_weight) << "\n"
      << "novelty_weight " << hex(c.novelty_weight) << "\n"
      << "norm " << to_string(c.norm) << "\n"
      << "epochs " << c.epochs << "\n"
      << "seed " << c.seed << "\n"
      << "init_scale " << hex(c.init_scale) << "\n"
      << "early_stop " << hex(c.early_stop) << "\n"
      << "rmse_log " << model.rmse_log().size();
  for (double r : model.rmse_log()) out << ' ' << hex(r);
  out << "\n";
  auto dump = [&](const char* tag, std::size_t rows, auto row_of) {
    out << tag << "\n";
    for (std::uint32_t a = 0; a < rows; ++a) {
      const auto v = row_of(a);
      for (std::size_t k = 0; k < v.size(); ++k) out << (k ? " " : "") << hex(v[k]);
      out << "\n";
    }
  };
  dump("P", model.n_users(), [&](std::uint32_t u) { return model.user(u); });
  dump("Q", model.n_items(), [&](std::uint32_t i) { return model.item(i); });
  if (!out) throw Error("failed writing " + path.string());
}

FactorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "nemf-model" || version != 1) {
    throw ParseError(path.string() + ": not a nemf model file");
  }
  auto expect = [&](const char* key) {
    std::string got;
    if (!(in >> got) || got != key) {
      throw ParseError(path.string() + ": expected '" + key + "', got '" + got + "'");
    }
  };
  auto read_hex = [&](const char* key) {
    expect(key);
    std::string text;
    in >> text;
    return unhex(text, path);
  };
  std::size_t n_users = 0, n_items = 0, log_size = 0;
  TrainConfig c;
  std::string norm;
  expect("users");
  in >> n_users;
  expect("items");
  in >> n_items;
  expect("factors");
  in >> c.factors;
  c.learning_rate = read_hex("learning_rate");
  c.weight_decay = read_hex("weight_decay");
  c.explain_weight = read_hex("explain_weight");
  c.novelty_weight = read_hex("novelty_weight");
  expect("norm");
  in >> norm;
  c.norm = parse_constraint_norm(norm);
  expect("epochs");
  in >> c.epochs;
  expect("seed");
  in >> c.seed;
  c.init_scale = read_hex("init_scale");
  c.early_stop = read_hex("early_stop");
  expect("rmse_log");
  in >> log_size;
  if (!in) throw ParseError(path.string() + ": truncated header");
  FactorModel model(n_users, n_items, c);
  std::string text;
  for (std::size_t k = 0; k < log_size; ++k) {
    in >> text;
    model.append_rmse(unhex(text, path));
  }
  expect("P");
  for (std::uint32_t u = 0; u < n_users; ++u) {
    for (double& x : model.user(u)) {
      if (!(in >> text)) throw ParseError(path.string() + ": truncated user factors");
      x = unhex(text, path);
    }
  }
  expect("Q");
  for (std::uint32_t i = 0; i < n_items; ++i) {
    for (double& x : model.item(i)) {
      if (!(in >> text)) throw ParseError(path.string() + ": truncated item factors");
      x = unhex(text, path);
    }
  }
  return model;
}

}  // namespace nemf
