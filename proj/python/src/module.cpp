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
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nemf/errors.hpp"
#include "nemf/explainability.hpp"
#include "nemf/factorization.hpp"
#include "nemf/harness.hpp"
#include "nemf/metrics.hpp"
#include "nemf/neighborhood.hpp"
#include "nemf/novelty.hpp"
#include "nemf/ranking.hpp"

namespace py = pybind11;
using namespace nemf;

namespace {

py::array_t<double> factor_array(const FactorModel& m, bool users) {
  const auto rows = users ? m.n_users() : m.n_items();
  const auto f = static_cast<std::size_t>(m.factors());
  py::array_t<double> out({rows, f});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = users ? m.user(static_cast<std::uint32_t>(r))
                           : m.item(static_cast<std::uint32_t>(r));
    for (std::size_t k = 0; k < f; ++k) view(r, k) = row[k];
  }
  return out;
}

std::vector<std::pair<std::uint32_t, double>> as_pairs(const RankedList& l) {
  std::vector<std::pair<std::uint32_t, double>> out;
  for (const auto& s : l.items) out.emplace_back(s.item, s.score);
  return out;
}

RankedList as_list(std::uint32_t user, const std::vector<std::uint32_t>& items, std::size_t n) {
  RankedList l{user, n ? n : items.size(), {}};
  for (auto i : items) l.items.push_back({i, 0.0});
  return l;
}

}  // namespace

PYBIND11_MODULE(_nemf, m) {
  m.doc() = "Explainable and novelty-aware matrix factorization";

  const auto& base = py::register_exception<Error>(m, "NemfError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<LookupError>(m, "LookupError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());

  py::class_<RatingScale>(m, "RatingScale")
      .def(py::init<>())
      .def(py::init([](int lo, int hi) { return RatingScale{lo, hi}; }), py::arg("min"),
           py::arg("max"))
      .def_readwrite("min", &RatingScale::min)
      .def_readwrite("max", &RatingScale::max);

  py::class_<RatingMatrix>(m, "RatingMatrix")
      .def(py::init([](std::size_t n_users, std::size_t n_items,
                       const std::vector<std::tuple<std::uint32_t, std::uint32_t, int>>& triplets,
                       RatingScale scale) {
             std::vector<Rating> r;
             for (auto [u, i, v] : triplets) r.push_back({u, i, v});
             return RatingMatrix(n_users, n_items, std::move(r), scale);
           }),
           py::arg("n_users"), py::arg("n_items"), py::arg("triplets"),
           py::arg("scale") = RatingScale{})
      .def_property_readonly("n_users", &RatingMatrix::n_users)
      .def_property_readonly("n_items", &RatingMatrix::n_items)
      .def("__len__", &RatingMatrix::size)
      .def("rating", &RatingMatrix::rating)
      .def("triplets", [](const RatingMatrix& r) {
        std::vector<std::tuple<std::uint32_t, std::uint32_t, int>> out;
        for (const auto& t : r.triplets()) out.emplace_back(t.user, t.item, t.value);
        return out;
      });

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("matrix", [](const Dataset& d) { return d.ratings.matrix; })
      .def_property_readonly("n_users", [](const Dataset& d) { return d.ratings.matrix.n_users(); })
      .def_property_readonly("n_items", [](const Dataset& d) { return d.ratings.matrix.n_items(); })
      .def_property_readonly("genres",
                             [](const Dataset& d) {
                               const auto g = d.catalog.genres();
                               return std::vector<std::string>(g.begin(), g.end());
                             })
      .def("user_index", [](const Dataset& d, std::int64_t id) { return d.ratings.users.internal(id); })
      .def("item_index", [](const Dataset& d, std::int64_t id) { return d.ratings.items.internal(id); })
      .def("user_id", [](const Dataset& d, std::uint32_t u) { return d.ratings.users.external(u); })
      .def("item_id", [](const Dataset& d, std::uint32_t i) { return d.ratings.items.external(i); })
      .def("title", [](const Dataset& d, std::uint32_t i) { return d.catalog.title(i); })
      .def("item_genres", [](const Dataset& d, std::uint32_t i) {
        std::vector<std::string> out;
        const auto mask = d.catalog.mask(i);
        const auto names = d.catalog.genres();
        for (std::size_t g = 0; g < names.size(); ++g) {
          if (mask & (GenreMask{1} << g)) out.push_back(names[g]);
        }
        return out;
      });

  m.def(
      "load_dataset",
      [](const std::filesystem::path& dir, const std::string& format) {
        return load_dataset(dir, parse_dataset_format(format));
      },
      py::arg("path"), py::arg("format") = "ml100k");

  py::class_<NeighborGraph>(m, "NeighborGraph")
      .def_property_readonly("k", &NeighborGraph::k)
      .def("__len__", &NeighborGraph::size)
      .def("neighbors", [](const NeighborGraph& g, std::uint32_t node) {
        std::vector<std::pair<std::uint32_t, double>> out;
        for (const auto& n : g.neighbors(node)) out.emplace_back(n.index, n.similarity);
        return out;
      });

  m.def("pearson", py::overload_cast<const RatingMatrix&, std::uint32_t, std::uint32_t>(&pearson),
        py::arg("matrix"), py::arg("u"), py::arg("v"));
  m.def("build_user_graph", &build_user_graph, py::arg("matrix"), py::arg("k") = 10,
        py::arg("workers") = 1);
  m.def("build_item_graph", &build_item_graph, py::arg("matrix"), py::arg("k") = 10,
        py::arg("workers") = 1);

  py::class_<SideMatrix>(m, "SideMatrix")
      .def_property_readonly("n_users", &SideMatrix::n_users)
      .def_property_readonly("n_items", &SideMatrix::n_items)
      .def_property_readonly("nnz", &SideMatrix::nnz)
      .def_property_readonly("normalized", [](const SideMatrix& s) { return s.meta().normalized; })
      .def("at", &SideMatrix::at)
      .def("max_weight", &SideMatrix::max_weight)
      .def("row", [](const SideMatrix& s, std::uint32_t u) {
        std::vector<std::pair<std::uint32_t, double>> out;
        for (const auto& e : s.row(u)) out.emplace_back(e.item, e.weight);
        return out;
      });

  m.def(
      "explainability_power",
      [](const std::map<int, int>& counts, int positive_threshold, RatingScale scale) {
        RatingHistogram h{scale, std::vector<int>(static_cast<std::size_t>(scale.max - scale.min + 1))};
        for (auto [r, c] : counts) {
          if (!scale.contains(r)) throw ConfigError("rating " + std::to_string(r) + " outside the scale");
          h.counts[static_cast<std::size_t>(r - scale.min)] = c;
        }
        return explainability_power(h, positive_threshold);
      },
      py::arg("counts"), py::arg("positive_threshold") = 4, py::arg("scale") = RatingScale{});
  m.def(
      "build_explainability",
      [](const RatingMatrix& matrix, const NeighborGraph& graph, int positive_threshold,
         bool normalized) {
        const ExplainConfig cfg{graph.k(), positive_threshold};
        auto raw = build_user_style_E(matrix, graph, cfg);
        return normalized ? normalize(raw, cfg, matrix.scale()) : raw;
      },
      py::arg("matrix"), py::arg("graph"), py::arg("positive_threshold") = 4,
      py::arg("normalized") = false);
  m.def(
      "build_novelty",
      [](const RatingMatrix& train, const Dataset& dataset, const std::string& kind,
         bool normalized) {
        auto raw = build_N_matrix(train, dataset.catalog, parse_novelty_kind(kind));
        return normalized ? training_novelty(raw, train) : raw;
      },
      py::arg("train"), py::arg("dataset"), py::arg("kind") = "distance",
      py::arg("normalized") = false);
  m.def("jaccard_distance", py::overload_cast<GenreMask, GenreMask>(&jaccard_distance));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("factors", &TrainConfig::factors)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("beta", &TrainConfig::weight_decay)
      .def_readwrite("lambda_", &TrainConfig::explain_weight)
      .def_readwrite("delta", &TrainConfig::novelty_weight)
      .def_property(
          "norm", [](const TrainConfig& c) { return std::string(to_string(c.norm)); },
          [](TrainConfig& c, const std::string& n) { c.norm = parse_constraint_norm(n); })
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("init_scale", &TrainConfig::init_scale)
      .def_readwrite("early_stop", &TrainConfig::early_stop)
      .def("validate", &TrainConfig::validate);

  py::class_<FactorModel>(m, "FactorModel")
      .def_property_readonly("n_users", &FactorModel::n_users)
      .def_property_readonly("n_items", &FactorModel::n_items)
      .def_property_readonly("factors", &FactorModel::factors)
      .def_property_readonly("rmse_log", &FactorModel::rmse_log)
      .def("predict", &FactorModel::predict)
      .def("user_factors", [](const FactorModel& f) { return factor_array(f, true); })
      .def("item_factors", [](const FactorModel& f) { return factor_array(f, false); })
      .def("save", [](const FactorModel& f, const std::filesystem::path& p) { save_model(f, p); });
  m.def("load_model", &load_model);

  m.def(
      "train",
      [](const RatingMatrix& ratings, const TrainConfig& cfg, const SideMatrix* explain,
         const SideMatrix* novelty) {
        py::gil_scoped_release release;
        return train(ratings, explain, novelty, cfg);
      },
      py::arg("ratings"), py::arg("config"), py::arg("explain") = nullptr,
      py::arg("novelty") = nullptr);

  m.def(
      "top_n",
      [](const FactorModel& model, const RatingMatrix& train, std::uint32_t u, std::size_t n) {
        return as_pairs(top_n(model, train, u, n));
      },
      py::arg("model"), py::arg("train"), py::arg("user"), py::arg("n") = 10);
  m.def(
      "mmr_rerank",
      [](const std::vector<std::pair<std::uint32_t, double>>& candidates, const Dataset& dataset,
         std::size_t n, double lambda) {
        RankedList pool{0, candidates.size(), {}};
        for (auto [i, s] : candidates) pool.items.push_back({i, s});
        return as_pairs(mmr_rerank(pool, dataset.catalog, n, lambda));
      },
      py::arg("candidates"), py::arg("dataset"), py::arg("n") = 10, py::arg("lambda_") = 0.5);

  m.def(
      "precision_at_n",
      [](const std::vector<std::uint32_t>& items, const RelevantSet& relevant, std::size_t n) {
        return precision_at_n(as_list(0, items, n), relevant);
      },
      py::arg("items"), py::arg("relevant"), py::arg("n") = 0);
  m.def(
      "ndcg",
      [](const std::vector<std::uint32_t>& items, const RelevantSet& relevant, std::size_t n) {
        return accuracy_ndcg(as_list(0, items, n), relevant);
      },
      py::arg("items"), py::arg("relevant"), py::arg("n") = 0);
  m.def(
      "mep",
      [](std::uint32_t user, const std::vector<std::uint32_t>& items, const SideMatrix& explain,
         double threshold, std::size_t n) {
        return mep(as_list(user, items, n), explain, threshold);
      },
      py::arg("user"), py::arg("items"), py::arg("explain"), py::arg("threshold") = 0.0,
      py::arg("n") = 0);
  m.def(
      "e_ndcg",
      [](std::uint32_t user, const std::vector<std::uint32_t>& items, const SideMatrix& explain,
         int k, RatingScale scale, std::size_t n) {
        return e_ndcg(as_list(user, items, n), explain, ExplainConfig{k, 4}, scale);
      },
      py::arg("user"), py::arg("items"), py::arg("explain"), py::arg("k") = 10,
      py::arg("scale") = RatingScale{}, py::arg("n") = 0);
  m.def("paired_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
    return paired_t_test(a, b);
  });

  m.def("_run_experiment_json",
        [](const std::string& spec_json, const std::filesystem::path& base) {
          ExperimentSpec spec = parse_experiment_spec(spec_json);
          if (!spec.dataset.empty() && spec.dataset.is_relative()) spec.dataset = base / spec.dataset;
          if (!spec.output_dir.empty() && spec.output_dir.is_relative()) {
            spec.output_dir = base / spec.output_dir;
          }
          py::gil_scoped_release release;
          return report_to_json(run_experiment(spec));
        });
  m.def("_run_config_file", [](const std::filesystem::path& path) {
    const ExperimentSpec spec = load_experiment_spec(path);
    py::gil_scoped_release release;
    return report_to_json(run_experiment(spec));
  });
  m.def("_compare_table", [](const std::string& report_json) {
    return compare_table(report_from_json(report_json));
  });
}
