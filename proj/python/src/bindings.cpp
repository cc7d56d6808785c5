// Copyright 2026 The seqvae Authors.
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

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "seqvae/cli.hpp"
#include "seqvae/errors.hpp"
#include "seqvae/evaluation.hpp"
#include "seqvae/models.hpp"
#include "seqvae/synthetic.hpp"
#include "seqvae/training.hpp"

namespace py = pybind11;
using namespace seqvae;

namespace {

// Trained or loaded model plus the split vocabulary it was trained against.
struct PyModel {
  std::shared_ptr<VaeModel> model;
  CheckpointInfo info;

  std::vector<double> score(const std::vector<ItemIndex>& history) const { return model->score(history); }

  std::vector<ItemIndex> recommend(const std::vector<ItemIndex>& history, std::size_t top_n) const {
    auto ranked = model->recommend(history);
    if (ranked.size() > top_n) ranked.resize(top_n);
    return ranked;
  }
};

ModelConfig config_from(const std::map<std::string, std::string>& settings) {
  ModelConfig cfg;
  for (const auto& [k, v] : settings) {
    if (!cfg.apply_setting(k, v)) throw ConfigError("unknown model setting '" + k + "'");
  }
  cfg.validate();
  return cfg;
}

py::dict metrics_dict(const EvalReport& report) {
  py::dict d;
  for (const auto& [k, v] : report.metrics) d[py::str(k)] = v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Variational sequential recommenders (C++ core)";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<LookupError>(m, "ItemLookupError", PyExc_KeyError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("ndcg_at_n", [](const std::vector<ItemIndex>& ranked, const std::vector<ItemIndex>& relevant, std::size_t n,
                        bool cap_idcg) { return ndcg_at_n(ranked, relevant, n, cap_idcg); },
        py::arg("ranked"), py::arg("relevant"), py::arg("n"), py::arg("cap_idcg") = false);
  m.def("precision_at_n", [](const std::vector<ItemIndex>& ranked, const std::vector<ItemIndex>& relevant,
                             std::size_t n) { return precision_at_n(ranked, relevant, n); },
        py::arg("ranked"), py::arg("relevant"), py::arg("n"));
  m.def("recall_at_n", [](const std::vector<ItemIndex>& ranked, const std::vector<ItemIndex>& relevant,
                          std::size_t n) { return recall_at_n(ranked, relevant, n); },
        py::arg("ranked"), py::arg("relevant"), py::arg("n"));

  m.def("kl_gaussian_standard",
        [](const std::vector<double>& mu, const std::vector<double>& log_sigma) {
          if (mu.size() != log_sigma.size()) throw DimensionError("mu and log_sigma differ in length");
          Tape tape;
          const GaussianParams g{tape.constant(Tensor::matrix(1, mu.size(), mu)),
                                 tape.constant(Tensor::matrix(1, log_sigma.size(), log_sigma))};
          return kl_gaussian_standard(g).item();
        },
        py::arg("mu"), py::arg("log_sigma"));

  m.def("next_k_targets",
        [](const std::vector<ItemIndex>& seq, std::size_t t, std::size_t k) { return next_k_targets(seq, t, k); },
        py::arg("sequence"), py::arg("t"), py::arg("k"));

  m.def("synthetic_cyclic",
        [](std::size_t n_items, std::size_t n_users, std::size_t length, std::uint64_t seed) {
          std::vector<std::vector<ItemIndex>> out;
          for (auto& s : synthetic::cyclic(n_items, n_users, length, seed)) out.push_back(std::move(s.items));
          return out;
        },
        py::arg("n_items"), py::arg("n_users"), py::arg("length"), py::arg("seed") = 42);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int status;
          {
            py::gil_scoped_release release;
            status = cli::run(args, out, err);
          }
          return py::make_tuple(status, out.str(), err.str());
        },
        py::arg("args"), "Runs a seqvae command; returns (status, stdout, stderr).");

  py::class_<PyModel>(m, "Model")
      .def_static(
          "load",
          [](const std::string& dir) {
            LoadedModel loaded = load_checkpoint(dir);
            return PyModel{std::shared_ptr<VaeModel>(std::move(loaded.model)), loaded.info};
          },
          py::arg("checkpoint_dir"))
      .def_property_readonly("kind", [](const PyModel& p) { return to_string(p.model->kind()); })
      .def_property_readonly("catalog_size", [](const PyModel& p) { return p.model->catalog_size(); })
      .def_property_readonly("epoch", [](const PyModel& p) { return p.info.epoch; })
      .def_property_readonly("config", [](const PyModel& p) {
        py::dict d;
        for (const auto& [k, v] : p.model->config().settings()) d[py::str(k)] = v;
        return d;
      })
      .def("score", &PyModel::score, py::arg("history"))
      .def("recommend", &PyModel::recommend, py::arg("history"), py::arg("top_n") = 10)
      .def("save", [](const PyModel& p, const std::string& dir) { save_checkpoint(dir, *p.model, p.info); },
           py::arg("checkpoint_dir"));

  m.def("train",
        [](const std::string& split_dir, const std::string& kind, const std::map<std::string, std::string>& settings) {
          const DatasetSplit split = read_split(split_dir);
          const ModelConfig cfg = config_from(settings);
          TrainResult result;
          {
            py::gil_scoped_release release;
            result = train(parse_model_kind(kind), split, cfg);
          }
          py::list curve;
          for (const auto& e : result.curve) {
            py::dict row;
            row["epoch"] = e.epoch;
            row["train_loss"] = e.train_loss;
            row["val_ndcg100"] = e.validation_ndcg100;
            row["seconds"] = e.seconds;
            curve.append(row);
          }
          PyModel model{std::shared_ptr<VaeModel>(std::move(result.model)),
                        {result.best_epoch, result.best_validation, split.vocabulary.digest()}};
          return py::make_tuple(model, curve);
        },
        py::arg("split_dir"), py::arg("kind"), py::arg("settings") = std::map<std::string, std::string>{},
        "Trains on a prepared split; returns (model, learning curve).");

  m.def("evaluate",
        [](const PyModel& model, const std::string& split_dir, const std::string& which,
           const std::vector<std::size_t>& cutoffs) {
          const DatasetSplit split = read_split(split_dir);
          if (model.model->catalog_size() != split.catalog_size()) {
            throw ConfigError("model catalog does not match the split vocabulary");
          }
          if (which != "test" && which != "validation") throw ConfigError("which must be test or validation");
          EvalOptions opts;
          opts.cutoffs = cutoffs;
          return metrics_dict(evaluate(*model.model, which == "test" ? split.test : split.validation, opts));
        },
        py::arg("model"), py::arg("split_dir"), py::arg("which") = "test",
        py::arg("cutoffs") = std::vector<std::size_t>{10, 100});

  m.def("evaluate_popularity",
        [](const std::string& split_dir, const std::string& which, const std::vector<std::size_t>& cutoffs) {
          const DatasetSplit split = read_split(split_dir);
          if (which != "test" && which != "validation") throw ConfigError("which must be test or validation");
          EvalOptions opts;
          opts.cutoffs = cutoffs;
          const PopularityBaseline pop(split.train, split.catalog_size());
          return metrics_dict(evaluate(pop, which == "test" ? split.test : split.validation, opts));
        },
        py::arg("split_dir"), py::arg("which") = "test", py::arg("cutoffs") = std::vector<std::size_t>{10, 100});
}
