#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

#include "dpgcl/accountant.hpp"
#include "dpgcl/config.hpp"
#include "dpgcl/dataset.hpp"
#include "dpgcl/errors.hpp"
#include "dpgcl/eval.hpp"
#include "dpgcl/sensitivity.hpp"
#include "dpgcl/trainer.hpp"

namespace py = pybind11;
using namespace dpgcl;

namespace {

EmbedSet embed_set_from(const std::vector<std::vector<double>>& rows,
                        const std::vector<int>& labels) {
  if (rows.empty()) throw std::invalid_argument("empty embedding set");
  EmbedSet set;
  set.embeddings = Matrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != set.embeddings.cols) {
      throw std::invalid_argument("ragged embedding rows");
    }
    std::copy(rows[i].begin(), rows[i].end(), set.embeddings.row(i).begin());
  }
  set.labels = labels.empty() ? std::vector<int>(rows.size(), 0) : labels;
  if (set.labels.size() != rows.size()) {
    throw std::invalid_argument("labels must match embedding rows");
  }
  return set;
}

EncoderSpec spec_from(int input_dim, const std::vector<int>& hidden_dims,
                      int output_dim, const std::string& activation,
                      std::int64_t init_seed) {
  EncoderSpec spec;
  spec.input_dim = input_dim;
  spec.hidden_dims = hidden_dims;
  spec.output_dim = output_dim;
  if (activation == "tanh") {
    spec.activation = Activation::kTanh;
  } else if (activation == "relu") {
    spec.activation = Activation::kRelu;
  } else {
    throw std::invalid_argument("activation must be 'tanh' or 'relu'");
  }
  spec.init_seed = init_seed;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Differentially private group-level contrastive learning";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<CalibrationError>(m, "CalibrationError");
  py::register_exception<SensitivityViolation>(m, "SensitivityViolation");

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("n", &Dataset::n)
      .def_readonly("d_x", &Dataset::d_x)
      .def_readonly("d_x2", &Dataset::d_x2)
      .def_readonly("num_classes", &Dataset::num_classes)
      .def_property_readonly("modality",
                             [](const Dataset& ds) {
                               return ds.modality == Modality::kUniModal
                                          ? "uni"
                                          : "dual";
                             })
      .def("labels",
           [](const Dataset& ds) {
             std::vector<int> labels;
             for (const auto& p : ds.pairs) labels.push_back(p.anchor.label);
             return labels;
           })
      .def("anchor_features",
           [](const Dataset& ds, std::size_t i) {
             return ds.pairs.at(i).anchor.features;
           })
      .def("positive_features",
           [](const Dataset& ds, std::size_t i) {
             return ds.pairs.at(i).positive.features;
           })
      .def("save", [](const Dataset& ds, const std::string& path) {
        save_dataset(ds, path);
      });

  m.def("generate_unimodal", &generate_unimodal, py::arg("num_classes"),
        py::arg("per_class"), py::arg("d_x"), py::arg("separation"),
        py::arg("noise_std"), py::arg("seed"));
  m.def("generate_dualmodal", &generate_dualmodal, py::arg("num_classes"),
        py::arg("per_class"), py::arg("d1"), py::arg("d2"),
        py::arg("separation"), py::arg("noise_std"), py::arg("seed"));
  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("split_dataset", &split_dataset, py::arg("dataset"),
        py::arg("train_per_class"));
  m.def(
      "poisson_subsample_indices",
      [](const Dataset& ds, double q, std::int64_t seed, std::int64_t step) {
        return poisson_subsample(ds, q, seed, step).source_indices;
      },
      py::arg("dataset"), py::arg("q"), py::arg("seed"), py::arg("step"));

  m.def(
      "cosine_similarity",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return cosine_similarity(a, b);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "encode",
      [](const std::string& checkpoint, int input_dim,
         const std::vector<int>& hidden_dims, int output_dim,
         const std::string& activation,
         const std::vector<std::vector<double>>& rows) {
        const EncoderSpec spec =
            spec_from(input_dim, hidden_dims, output_dim, activation, 0);
        const ParamVector params = load_params(checkpoint);
        if (params.size() != param_count(spec)) {
          throw std::invalid_argument("checkpoint does not match the encoder");
        }
        Matrix inputs(rows.size(), input_dim);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].size() != static_cast<std::size_t>(input_dim)) {
            throw std::invalid_argument("bad input row width");
          }
          std::copy(rows[i].begin(), rows[i].end(), inputs.row(i).begin());
        }
        const Matrix out = forward(params, spec, inputs);
        std::vector<std::vector<double>> result(out.rows);
        for (std::size_t i = 0; i < out.rows; ++i) {
          result[i].assign(out.row(i).begin(), out.row(i).end());
        }
        return result;
      },
      py::arg("checkpoint"), py::arg("input_dim"), py::arg("hidden_dims"),
      py::arg("output_dim"), py::arg("activation"), py::arg("rows"),
      "Embed feature rows with a trained checkpoint.");

  // accountant
  m.def("rdp_gaussian", &rdp_gaussian, py::arg("sigma"), py::arg("alpha"));
  m.def(
      "rdp_subsampled_gaussian",
      [](double q, double sigma, double alpha) {
        const int a = static_cast<int>(alpha);
        if (static_cast<double>(a) != alpha) {
          throw std::invalid_argument("alpha must be an integer order");
        }
        return rdp_subsampled_gaussian(q, sigma, a);
      },
      py::arg("q"), py::arg("sigma"), py::arg("alpha"));
  m.def(
      "rdp_to_dp",
      [](const std::vector<int>& orders, const std::vector<double>& rho,
         double delta) {
        RdpCurve curve;
        curve.orders = orders;
        curve.rho = rho;
        const DpConversion conv = rdp_to_dp(curve, delta);
        return py::make_tuple(conv.epsilon, conv.best_alpha);
      },
      py::arg("orders"), py::arg("rho"), py::arg("delta"));
  m.def(
      "certified_epsilon",
      [](double q, double sigma, std::int64_t T, double delta) {
        return certified_epsilon(q, sigma, T, delta, default_orders());
      },
      py::arg("q"), py::arg("sigma"), py::arg("steps"), py::arg("delta"));
  m.def(
      "calibrate_sigma",
      [](double epsilon, double delta, double q, std::int64_t T) {
        PrivacySpec spec;
        spec.epsilon_target = epsilon;
        spec.delta = delta;
        spec.q = q;
        spec.T = T;
        return calibrate_sigma(spec);
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("q"), py::arg("steps"));
  m.def("default_delta", &default_delta, py::arg("n"));

  // sensitivity oracle
  m.def(
      "theoretical_bound",
      [](const std::string& strategy, std::size_t B, std::size_t K, double C) {
        return theoretical_bound(clip_kind_from_string(strategy), B, K, C);
      },
      py::arg("strategy"), py::arg("B"), py::arg("K"), py::arg("C"));
  m.def(
      "run_sensitivity_trial",
      [](const std::string& strategy, double C, std::size_t B, std::size_t S,
         std::uint64_t encoder_seed, std::uint64_t data_seed, bool adversarial,
         double tau, std::size_t n_aug) {
        const SensitivityTrial t =
            run_trial({clip_kind_from_string(strategy), C}, B, S, encoder_seed,
                      data_seed, adversarial, tau, n_aug);
        py::dict out;
        out["measured"] = t.measured;
        out["bound"] = t.bound;
        out["K"] = t.K;
        return out;
      },
      py::arg("strategy"), py::arg("C"), py::arg("B"), py::arg("S"),
      py::arg("encoder_seed"), py::arg("data_seed"),
      py::arg("adversarial") = false, py::arg("tau") = 0.1,
      py::arg("n_aug") = 0);

  // training from a flat config mapping (same keys as the CLI)
  m.def(
      "train",
      [](const Dataset& ds, const std::map<std::string, std::string>& kv) {
        const RunConfig cfg = RunConfig::from_map(kv);
        TrainConfig tc;
        tc.strategy.kind = clip_kind_from_string(cfg.get_string("strategy"));
        tc.strategy.C = cfg.get_real("clip_norm");
        tc.loss.tau = cfg.get_real("tau");
        tc.loss.S = static_cast<std::size_t>(cfg.get_int("group_size"));
        tc.loss.n_aug = static_cast<std::size_t>(cfg.get_int_or("n_aug", 0));
        tc.loss.modality = ds.modality;
        tc.master_seed = cfg.get_int_or("master_seed", 0);
        tc.loss.aug.kind =
            augment_kind_from_string(cfg.get_string_or("aug_kind", "mask"));
        tc.loss.aug.strength = cfg.get_real_or("aug_strength", 0.2);
        tc.loss.aug.seed = tc.master_seed;
        tc.optimizer = cfg.get_string_or("optimizer", "adam") == "sgd"
                           ? OptimizerKind::kSgd
                           : OptimizerKind::kAdam;
        tc.lr = cfg.get_real("lr");
        tc.T = cfg.get_int("steps");
        tc.q = cfg.get_real("q");
        tc.sigma = cfg.get_real("sigma");
        std::vector<int> hidden;
        if (cfg.has("hidden_dims")) {
          for (auto v : cfg.get_int_list("hidden_dims")) {
            hidden.push_back(static_cast<int>(v));
          }
        }
        tc.encoder1 = spec_from(ds.d_x, hidden,
                                static_cast<int>(cfg.get_int("d_z")),
                                cfg.get_string_or("activation", "tanh"),
                                cfg.get_int_or("init_seed", tc.master_seed));
        if (tc.strategy.kind == ClipKind::kGroupNegDual) {
          std::vector<int> hidden2;
          if (cfg.has("hidden_dims2")) {
            for (auto v : cfg.get_int_list("hidden_dims2")) {
              hidden2.push_back(static_cast<int>(v));
            }
          }
          tc.encoder2 = spec_from(
              ds.d_x2, hidden2, static_cast<int>(cfg.get_int("d_z")),
              cfg.get_string_or("activation2", "tanh"),
              cfg.get_int_or("init_seed2", tc.master_seed + 1));
        }
        const double delta =
            cfg.has("delta") ? cfg.get_real("delta")
                             : default_delta(static_cast<std::int64_t>(ds.n()));
        tc.certificate = certify(tc.q, tc.sigma, tc.T, delta);

        const TrainResult r = train(ds, tc);
        py::dict out;
        out["params1"] = r.params1.values;
        out["params2"] = r.params2.values;
        py::list metrics;
        for (const auto& row : r.metrics) {
          py::dict d;
          d["step"] = row.step;
          d["loss"] = row.loss;
          d["snr"] = row.snr;
          d["clip_fraction"] = row.clip_fraction;
          d["grad_norm"] = row.grad_norm;
          d["noise_norm"] = row.noise_norm;
          metrics.append(d);
        }
        out["metrics"] = metrics;
        return out;
      },
      py::arg("dataset"), py::arg("config"),
      "Run the training loop from a flat config mapping; requires an "
      "explicit sigma (use calibrate_sigma first).");

  // evaluation
  m.def(
      "knn_accuracy",
      [](const std::vector<std::vector<double>>& train_emb,
         const std::vector<int>& train_labels,
         const std::vector<std::vector<double>>& test_emb,
         const std::vector<int>& test_labels, int k) {
        return knn_accuracy(embed_set_from(train_emb, train_labels),
                            embed_set_from(test_emb, test_labels), k);
      },
      py::arg("train_embeddings"), py::arg("train_labels"),
      py::arg("test_embeddings"), py::arg("test_labels"), py::arg("k") = 3);
  m.def(
      "linear_probe",
      [](const std::vector<std::vector<double>>& train_emb,
         const std::vector<int>& train_labels,
         const std::vector<std::vector<double>>& test_emb,
         const std::vector<int>& test_labels, int epochs, double lr) {
        return linear_probe(embed_set_from(train_emb, train_labels),
                            embed_set_from(test_emb, test_labels), epochs, lr);
      },
      py::arg("train_embeddings"), py::arg("train_labels"),
      py::arg("test_embeddings"), py::arg("test_labels"),
      py::arg("epochs") = 500, py::arg("lr") = 0.1);
  m.def(
      "retrieval_at_k",
      [](const std::vector<std::vector<double>>& queries,
         const std::vector<std::vector<double>>& gallery, int K,
         const std::vector<std::size_t>& pairing) {
        return retrieval_at_k(embed_set_from(queries, {}),
                              embed_set_from(gallery, {}), K, pairing);
      },
      py::arg("queries"), py::arg("gallery"), py::arg("K"), py::arg("pairing"));
}
