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
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "nemf/dataset.hpp"
#include "nemf/random.hpp"
#include "nemf/side_matrix.hpp"

namespace nemf {

// Distance used by the user/item proximity constraint.
enum class ConstraintNorm {
  kL1,  // Manhattan, signum updates
  kL2,  // Euclidean
};

ConstraintNorm parse_constraint_norm(std::string_view name);
std::string_view to_string(ConstraintNorm norm);

// Hyper-parameters of one training run. MF is explain_weight ==
// novelty_weight == 0; EMF sets only explain_weight; the novelty-only model
// sets only novelty_weight; NEMF sets both.
struct TrainConfig {
  int factors = 80;
  double learning_rate = 0.001;  // eta
  double weight_decay = 0.02;    // beta
  double explain_weight = 0.0;   // lambda
  double novelty_weight = 0.0;   // delta
  ConstraintNorm norm = ConstraintNorm::kL1;
  int epochs = 100;
  std::uint64_t seed = 42;
  double init_scale = 0.1;
  // Stop once |RMSE(epoch) - RMSE(epoch-1)| < early_stop; 0 disables.
  double early_stop = 0.0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// User factors P (n x f) and item factors Q (m x f), row-major.
class FactorModel {
 public:
  FactorModel() = default;
  FactorModel(std::size_t n_users, std::size_t n_items, const TrainConfig& config);

  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }
  int factors() const { return config_.factors; }
  const TrainConfig& config() const { return config_; }

  std::span<double> user(std::uint32_t u);
  std::span<const double> user(std::uint32_t u) const;
  std::span<double> item(std::uint32_t i);
  std::span<const double> item(std::uint32_t i) const;

  // Unclamped dot product u_i . v_j.
  double predict(std::uint32_t u, std::uint32_t i) const;

  // Train RMSE per completed epoch.
  const std::vector<double>& rmse_log() const { return rmse_log_; }
  void append_rmse(double rmse) { rmse_log_.push_back(rmse); }

  bool all_finite() const;

  friend bool operator==(const FactorModel&, const FactorModel&) = default;

 private:
  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  TrainConfig config_{};
  std::vector<double> users_;
  std::vector<double> items_;
  std::vector<double> rmse_log_;
};

// Entries i.i.d. uniform in [0, init_scale), drawn from Rng(cfg.seed): all
// user rows first, then all item rows.
FactorModel init_model(const TrainConfig& cfg, std::size_t n_users, std::size_t n_items);

// Generator that orders each epoch's pass over the ratings.
Rng shuffle_stream(const TrainConfig& cfg);

// Per-rating explainability / novelty weights aligned with a triplet list.
struct SideWeights {
  std::vector<double> explain;
  std::vector<double> novelty;
};

// Null matrices read as all-zero.
SideWeights align_side_weights(std::span<const Rating> triplets, const SideMatrix* explain,
                               const SideMatrix* novelty);

// One stochastic step on a single rating, updating both vectors from their
// pre-update values:
//   u += eta (2 e v - beta u - c_u),   v += eta (2 e u - beta v - c_v)
// with w = lambda E + delta N and, per coordinate d = u - v,
//   L1: c_u = c_v = sgn(d) w          (sgn(0) = 0)
//   L2: c_u = d w, c_v = -d w
// Returns the pre-update error e = r - u.v.
double sgd_step(std::span<double> user, std::span<double> item, double rating,
                double explain, double novelty, const TrainConfig& cfg);

// One pass over `ratings` in `order`. Returns the epoch's train RMSE
// (pre-update errors). Throws DivergenceError naming `epoch` when a factor
// turns non-finite.
double sgd_epoch(FactorModel& model, std::span<const Rating> ratings,
                 std::span<const std::size_t> order, const SideWeights& weights,
                 const TrainConfig& cfg, int epoch);

// Full run: init_model, then cfg.epochs epochs, each visiting the training
// triplets in a freshly shuffled order drawn from shuffle_stream(cfg).
// Deterministic in (data, cfg).
FactorModel train(const RatingMatrix& ratings, const SideMatrix* explain,
                  const SideMatrix* novelty, const TrainConfig& cfg);

// Objective restricted to one rating:
//   (r - u.v)^2 + beta/2 (|u|^2 + |v|^2) + w C(u - v)
// with C = |.|_1 (L1) or 1/2 |.|_2^2 (L2).
double pair_objective(std::span<const double> user, std::span<const double> item,
                      double rating, double explain, double novelty, const TrainConfig& cfg);

struct PairGradient {
  std::vector<double> user;
  std::vector<double> item;
};

// Analytic gradient of pair_objective (subgradient 0 where a coordinate of
// u - v is exactly 0 under L1).
PairGradient pair_gradient(std::span<const double> user, std::span<const double> item,
                           double rating, double explain, double novelty,
                           const TrainConfig& cfg);

// Sum of pair_objective over `ratings`.
double objective(const FactorModel& model, std::span<const Rating> ratings,
                 const SideMatrix* explain, const SideMatrix* novelty, const TrainConfig& cfg);

// Text dump: sizes, full TrainConfig, RMSE log and both factor matrices in
// hex-float, so a reload reproduces predictions bit for bit.
void save_model(const FactorModel& model, const std::filesystem::path& path);
FactorModel load_model(const std::filesystem::path& path);

}  // namespace nemf
