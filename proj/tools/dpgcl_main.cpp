#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "dpgcl/accountant.hpp"
#include "dpgcl/config.hpp"
#include "dpgcl/dataset.hpp"
#include "dpgcl/errors.hpp"
#include "dpgcl/eval.hpp"
#include "dpgcl/sensitivity.hpp"
#include "dpgcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace dpgcl;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  return out;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed = 0;
  bool seed_set = false;
};

RunConfig load_config(const CommonArgs& args) {
  RunConfig cfg = RunConfig::parse_file(args.config_path);
  if (args.seed_set) cfg.set("master_seed", std::to_string(args.seed));
  return cfg;
}

fs::path out_file(const CommonArgs& args, const RunConfig& cfg,
                  const std::string& suffix) {
  fs::create_directories(args.out_dir);
  return fs::path(args.out_dir) / (cfg.get_string("run_id") + suffix);
}

Modality parse_modality(const std::string& tok) {
  if (tok == "uni") return Modality::kUniModal;
  if (tok == "dual") return Modality::kDualModal;
  throw ConfigError("modality must be `uni` or `dual`, got: " + tok);
}

Activation parse_activation(const std::string& tok) {
  if (tok == "tanh") return Activation::kTanh;
  if (tok == "relu") return Activation::kRelu;
  throw ConfigError("activation must be `tanh` or `relu`, got: " + tok);
}

std::vector<int> parse_hidden(const RunConfig& cfg, const std::string& key) {
  std::vector<int> dims;
  if (!cfg.has(key)) return dims;
  for (std::int64_t v : cfg.get_int_list(key)) {
    dims.push_back(static_cast<int>(v));
  }
  return dims;
}

EncoderSpec encoder_from_config(const RunConfig& cfg, int input_dim,
                                const std::string& hidden_key,
                                const std::string& act_key,
                                std::int64_t init_seed) {
  EncoderSpec spec;
  spec.input_dim = input_dim;
  spec.hidden_dims = parse_hidden(cfg, hidden_key);
  spec.output_dim = static_cast<int>(cfg.get_int("d_z"));
  spec.activation = parse_activation(cfg.get_string_or(act_key, "tanh"));
  spec.init_seed = init_seed;
  return spec;
}

AugmentOp augment_from_config(const RunConfig& cfg, std::int64_t seed) {
  AugmentOp op;
  op.kind = augment_kind_from_string(cfg.get_string_or("aug_kind", "mask"));
  op.strength = cfg.get_real_or("aug_strength", 0.2);
  op.seed = seed;
  return op;
}

// ---------------------------------------------------------------- gen

int cmd_gen(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  cfg.restrict_keys({"run_id", "modality", "num_classes", "per_class",
                     "test_per_class", "d_x", "d_x2", "separation",
                     "noise_std", "dataset_seed", "master_seed"});
  const Modality modality = parse_modality(cfg.get_string("modality"));
  const int num_classes = static_cast<int>(cfg.get_int("num_classes"));
  const int per_class = static_cast<int>(cfg.get_int("per_class"));
  // Held-out pairs come from the same generation so both splits share the
  // class means.
  const int test_per_class =
      static_cast<int>(cfg.get_int_or("test_per_class", 0));
  const int d_x = static_cast<int>(cfg.get_int("d_x"));
  const double separation = cfg.get_real("separation");
  const double noise_std = cfg.get_real("noise_std");
  const std::int64_t seed =
      cfg.get_int_or("dataset_seed", cfg.get_int_or("master_seed", 0));

  Dataset ds;
  if (modality == Modality::kUniModal) {
    ds = generate_unimodal(num_classes, per_class + test_per_class, d_x,
                           separation, noise_std, seed);
  } else {
    const int d_x2 = static_cast<int>(cfg.get_int("d_x2"));
    ds = generate_dualmodal(num_classes, per_class + test_per_class, d_x, d_x2,
                            separation, noise_std, seed);
  }
  if (test_per_class > 0) {
    auto [train, test] = split_dataset(ds, per_class);
    ds = std::move(train);
    const fs::path test_path = out_file(args, cfg, ".test.txt");
    save_dataset(test, test_path.string());
    std::printf("wrote %s\n", test_path.string().c_str());
  }
  const fs::path path = out_file(args, cfg, ".data.txt");
  save_dataset(ds, path.string());

  std::printf("wrote %s\n", path.string().c_str());
  std::printf("n=%zu d_x=%d d_x2=%d num_classes=%d modality=%s\n", ds.n(),
              ds.d_x, ds.d_x2, ds.num_classes,
              ds.modality == Modality::kUniModal ? "uni" : "dual");
  std::vector<std::size_t> per_class_count(num_classes, 0);
  for (const auto& p : ds.pairs) per_class_count[p.anchor.label] += 1;
  for (int c = 0; c < num_classes; ++c) {
    std::printf("class %d: %zu pairs\n", c, per_class_count[c]);
  }
  return 0;
}

// ---------------------------------------------------------- calibrate

int cmd_calibrate(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  cfg.restrict_keys({"run_id", "epsilon", "delta", "q", "steps", "master_seed"});
  PrivacySpec spec;
  spec.epsilon_target = cfg.get_real("epsilon");
  spec.delta = cfg.get_real("delta");
  spec.q = cfg.get_real("q");
  spec.T = cfg.get_int("steps");
  const double sigma = calibrate_sigma(spec);
  const RdpCurve curve =
      compose(rdp_curve(spec.q, sigma, default_orders()), spec.T);
  const DpConversion conv = rdp_to_dp(curve, spec.delta);

  std::printf("sigma=%s\n", fmt(sigma).c_str());
  std::printf("best_alpha=%d\n", conv.best_alpha);
  std::printf("epsilon=%s\n", fmt(conv.epsilon).c_str());

  auto out = open_out(out_file(args, cfg, ".calibration.csv"));
  out << "epsilon_target,delta,q,steps,sigma,best_alpha,epsilon_certified\n";
  out << fmt(spec.epsilon_target) << ',' << fmt(spec.delta) << ','
      << fmt(spec.q) << ',' << spec.T << ',' << fmt(sigma) << ','
      << conv.best_alpha << ',' << fmt(conv.epsilon) << '\n';
  return 0;
}

// -------------------------------------------------------------- train

const std::set<std::string> kTrainKeys = {
    "run_id",      "dataset",      "strategy",   "clip_norm",
    "tau",         "group_size",   "n_aug",      "aug_kind",
    "aug_strength", "optimizer",   "lr",         "adam_beta1",
    "adam_beta2",  "adam_eps",     "steps",      "q",
    "sigma",       "epsilon",      "delta",      "hidden_dims",
    "hidden_dims2", "d_z",         "activation", "activation2",
    "init_seed",   "init_seed2",   "master_seed"};

TrainConfig train_config_from(const RunConfig& cfg, const Dataset& ds) {
  TrainConfig tc;
  tc.strategy.kind = clip_kind_from_string(cfg.get_string("strategy"));
  tc.strategy.C = cfg.get_real("clip_norm");
  tc.loss.tau = cfg.get_real("tau");
  tc.loss.S = static_cast<std::size_t>(cfg.get_int("group_size"));
  tc.loss.n_aug = static_cast<std::size_t>(cfg.get_int_or("n_aug", 0));
  tc.loss.modality = ds.modality;
  tc.master_seed = cfg.get_int_or("master_seed", 0);
  tc.loss.aug = augment_from_config(cfg, tc.master_seed);

  const std::string opt = cfg.get_string_or("optimizer", "adam");
  if (opt == "adam") {
    tc.optimizer = OptimizerKind::kAdam;
  } else if (opt == "sgd") {
    tc.optimizer = OptimizerKind::kSgd;
  } else {
    throw ConfigError("optimizer must be `sgd` or `adam`, got: " + opt);
  }
  tc.lr = cfg.get_real("lr");
  tc.adam_beta1 = cfg.get_real_or("adam_beta1", 0.9);
  tc.adam_beta2 = cfg.get_real_or("adam_beta2", 0.999);
  tc.adam_eps = cfg.get_real_or("adam_eps", 1e-8);
  tc.T = cfg.get_int("steps");
  tc.q = cfg.get_real("q");

  tc.encoder1 =
      encoder_from_config(cfg, ds.d_x, "hidden_dims", "activation",
                          cfg.get_int_or("init_seed", tc.master_seed));
  if (tc.strategy.kind == ClipKind::kGroupNegDual) {
    tc.encoder2 =
        encoder_from_config(cfg, ds.d_x2, "hidden_dims2", "activation2",
                            cfg.get_int_or("init_seed2", tc.master_seed + 1));
  }

  // Privacy wiring: an explicit sigma is certified as-is; otherwise the
  // accountant calibrates the smallest sigma for the epsilon target.
  const double delta = cfg.has("delta")
                           ? cfg.get_real("delta")
                           : default_delta(static_cast<std::int64_t>(ds.n()));
  if (cfg.has("sigma")) {
    tc.sigma = cfg.get_real("sigma");
    tc.certificate = certify(tc.q, tc.sigma, tc.T, delta);
    if (cfg.has("epsilon") &&
        !(tc.certificate->epsilon <= cfg.get_real("epsilon") + 1e-9)) {
      throw ConfigError("configured sigma does not meet the epsilon target");
    }
  } else {
    PrivacySpec spec;
    spec.epsilon_target = cfg.get_real("epsilon");
    spec.delta = delta;
    spec.q = tc.q;
    spec.T = tc.T;
    tc.sigma = calibrate_sigma(spec);
    tc.certificate = certify(tc.q, tc.sigma, tc.T, delta);
  }
  return tc;
}

void write_metrics(std::ofstream out, const std::vector<MetricsRow>& rows) {
  out << "step,loss,snr,clip_fraction,grad_norm,noise_norm\n";
  for (const auto& r : rows) {
    out << r.step << ',' << fmt(r.loss) << ',' << fmt(r.snr) << ','
        << fmt(r.clip_fraction) << ',' << fmt(r.grad_norm) << ','
        << fmt(r.noise_norm) << '\n';
  }
}

int cmd_train(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  cfg.restrict_keys(kTrainKeys);
  const Dataset ds = load_dataset(cfg.get_string("dataset"));
  const TrainConfig tc = train_config_from(cfg, ds);

  std::printf("loss_path=%s\n", to_string(tc.strategy.kind).c_str());
  std::printf("sigma=%s\n", fmt(tc.sigma).c_str());
  std::printf("epsilon=%s\n", fmt(tc.certificate->epsilon).c_str());
  std::printf("delta=%s\n", fmt(tc.certificate->delta).c_str());

  const TrainResult result = train(ds, tc);

  const fs::path metrics_path = out_file(args, cfg, ".metrics.csv");
  write_metrics(open_out(metrics_path), result.metrics);
  const fs::path ckpt1 = out_file(args, cfg, ".params1.ckpt");
  save_params(result.params1, ckpt1.string());
  std::printf("wrote %s\n", metrics_path.string().c_str());
  std::printf("wrote %s\n", ckpt1.string().c_str());
  if (!result.params2.values.empty()) {
    const fs::path ckpt2 = out_file(args, cfg, ".params2.ckpt");
    save_params(result.params2, ckpt2.string());
    std::printf("wrote %s\n", ckpt2.string().c_str());
  }
  if (!result.metrics.empty()) {
    std::printf("final_loss=%s\n", fmt(result.metrics.back().loss).c_str());
  }
  return 0;
}

// --------------------------------------------------------------- eval

int cmd_eval(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  cfg.restrict_keys({"run_id", "train_data", "test_data", "checkpoint",
                     "checkpoint2", "hidden_dims", "hidden_dims2", "d_z",
                     "activation", "activation2", "knn_k", "probe_epochs",
                     "probe_lr", "retrieval_k", "master_seed"});
  const Dataset train_ds = load_dataset(cfg.get_string("train_data"));
  const Dataset test_ds = load_dataset(cfg.get_string("test_data"));
  const std::int64_t seed = cfg.get_int_or("master_seed", 0);

  const EncoderSpec spec1 =
      encoder_from_config(cfg, train_ds.d_x, "hidden_dims", "activation", 0);
  const ParamVector params1 = load_params(cfg.get_string("checkpoint"));
  if (params1.size() != param_count(spec1)) {
    throw ConfigError("checkpoint does not match the configured encoder");
  }

  auto out = open_out(out_file(args, cfg, ".eval.csv"));
  out << "metric,value,k,seed\n";

  if (train_ds.modality == Modality::kUniModal) {
    const EmbedSet train_emb = embed_anchors(train_ds, params1, spec1);
    const EmbedSet test_emb = embed_anchors(test_ds, params1, spec1);
    const int k = static_cast<int>(cfg.get_int_or("knn_k", 3));
    const double knn = knn_accuracy(train_emb, test_emb, k);
    const double probe =
        linear_probe(train_emb, test_emb,
                     static_cast<int>(cfg.get_int_or("probe_epochs", 500)),
                     cfg.get_real_or("probe_lr", 0.1));
    out << "knn," << fmt(knn) << ',' << k << ',' << seed << '\n';
    out << "linear_probe," << fmt(probe) << ",0," << seed << '\n';
    std::printf("knn=%s\n", fmt(knn).c_str());
    std::printf("linear_probe=%s\n", fmt(probe).c_str());
  } else {
    const EncoderSpec spec2 = encoder_from_config(
        cfg, train_ds.d_x2, "hidden_dims2", "activation2", 0);
    const ParamVector params2 = load_params(cfg.get_string("checkpoint2"));
    if (params2.size() != param_count(spec2)) {
      throw ConfigError("checkpoint2 does not match the configured encoder");
    }
    const EmbedSet queries = embed_anchors(test_ds, params1, spec1);
    const EmbedSet gallery = embed_positives(test_ds, params2, spec2);
    std::vector<std::size_t> pairing(test_ds.n());
    for (std::size_t i = 0; i < pairing.size(); ++i) pairing[i] = i;
    const int K = static_cast<int>(cfg.get_int_or("retrieval_k", 10));
    const double i2t = retrieval_at_k(queries, gallery, K, pairing);
    const double t2i = retrieval_at_k(gallery, queries, K, pairing);
    out << "retrieval_i2t," << fmt(i2t) << ',' << K << ',' << seed << '\n';
    out << "retrieval_t2i," << fmt(t2i) << ',' << K << ',' << seed << '\n';
    std::printf("retrieval_i2t=%s\n", fmt(i2t).c_str());
    std::printf("retrieval_t2i=%s\n", fmt(t2i).c_str());
  }
  return 0;
}

// -------------------------------------------------- sensitivity-check

int cmd_sensitivity(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  cfg.restrict_keys({"run_id", "strategies", "batch_sizes", "group_sizes",
                     "clip_norms", "trials", "tau", "n_aug", "master_seed"});
  std::vector<ClipKind> strategies;
  for (const auto& name : cfg.get_string_list("strategies")) {
    strategies.push_back(clip_kind_from_string(name));
  }
  std::vector<std::size_t> batch_sizes, group_sizes;
  for (std::int64_t b : cfg.get_int_list("batch_sizes")) {
    batch_sizes.push_back(static_cast<std::size_t>(b));
  }
  for (std::int64_t s : cfg.get_int_list("group_sizes")) {
    group_sizes.push_back(static_cast<std::size_t>(s));
  }
  const std::vector<double> clip_norms = cfg.get_real_list("clip_norms");
  const std::size_t trials = static_cast<std::size_t>(cfg.get_int("trials"));
  const double tau = cfg.get_real_or("tau", 0.1);
  const std::size_t n_aug =
      static_cast<std::size_t>(cfg.get_int_or("n_aug", 1));
  const std::uint64_t seed =
      static_cast<std::uint64_t>(cfg.get_int_or("master_seed", 0));

  const SweepReport report = sweep(strategies, batch_sizes, group_sizes,
                                   clip_norms, trials, seed, tau, n_aug);

  auto out = open_out(out_file(args, cfg, ".sensitivity.csv"));
  out << "strategy,B,S,C,K,max_measured,bound,ratio\n";
  for (const auto& cell : report.cells) {
    out << to_string(cell.strategy) << ',' << cell.B << ',' << cell.S << ','
        << fmt(cell.C) << ',' << cell.K << ',' << fmt(cell.max_measured) << ','
        << fmt(cell.bound) << ',' << fmt(cell.ratio) << '\n';
  }
  std::printf("all %zu cells within bounds\n", report.cells.size());
  return 0;
}

// ---------------------------------------------------------------- snr

int cmd_snr(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  cfg.restrict_keys({"run_id", "dataset", "batch_size", "clip_norm", "tau",
                     "group_sizes", "n_aug_values", "sigma", "seeds",
                     "aug_kind", "aug_strength", "hidden_dims", "d_z",
                     "activation", "master_seed"});
  const Dataset ds = load_dataset(cfg.get_string("dataset"));
  const std::size_t B = static_cast<std::size_t>(cfg.get_int("batch_size"));
  if (B < 1 || B > ds.n()) {
    throw ConfigError("batch_size must be in [1, dataset size]");
  }
  if (ds.modality != Modality::kUniModal) {
    throw ConfigError("the SNR study runs on uni-modal data");
  }
  PairBatch batch;
  for (std::size_t i = 0; i < B; ++i) {
    batch.pairs.push_back(ds.pairs[i]);
    batch.source_indices.push_back(i);
  }

  const double C = cfg.get_real("clip_norm");
  const double tau = cfg.get_real("tau");
  const double sigma = cfg.get_real("sigma");
  const std::int64_t n_seeds = cfg.get_int_or("seeds", 20);
  const std::int64_t master = cfg.get_int_or("master_seed", 0);

  auto out = open_out(out_file(args, cfg, ".snr.csv"));
  out << "S,n_aug,mean_snr,seeds\n";
  for (std::int64_t S : cfg.get_int_list("group_sizes")) {
    for (std::int64_t n_aug : cfg.get_int_list("n_aug_values")) {
      double total = 0.0;
      for (std::int64_t s = 0; s < n_seeds; ++s) {
        const EncoderSpec spec = encoder_from_config(
            cfg, ds.d_x, "hidden_dims", "activation", master + s);
        const ParamVector params = init_params(spec);
        const GroupAssignment groups =
            assign_groups(B, static_cast<std::size_t>(S), master + s, 0);
        LossConfig loss_cfg;
        loss_cfg.tau = tau;
        loss_cfg.S = static_cast<std::size_t>(S);
        loss_cfg.n_aug = static_cast<std::size_t>(n_aug);
        loss_cfg.aug = augment_from_config(cfg, master + s);
        const ClipStrategy strategy{
            n_aug > 0 ? ClipKind::kGroupNegAug : ClipKind::kGroupNeg, C};
        const BoundedGradient bounded =
            bounded_gradient(strategy, params, spec, batch, groups, loss_cfg);
        const NoisySummary summary = privatized_step(
            bounded.sum, bounded.k_effective, C, sigma, master + s, 0);
        total += summary.snr;
      }
      const double mean = total / static_cast<double>(n_seeds);
      out << S << ',' << n_aug << ',' << fmt(mean) << ',' << n_seeds << '\n';
      std::printf("S=%" PRId64 " n_aug=%" PRId64 " mean_snr=%s\n", S, n_aug,
                  fmt(mean).c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpgcl: differentially private group contrastive learning"};
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "path to a key=value config")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "override master_seed")
        ->each([&](const std::string&) { args.seed_set = true; });
  };

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic pair dataset");
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "search the minimal noise multiplier");
  CLI::App* train = app.add_subcommand("train", "run the training loop");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a trained encoder");
  CLI::App* sensitivity = app.add_subcommand(
      "sensitivity-check", "verify sensitivity bounds on coupled batches");
  CLI::App* snr =
      app.add_subcommand("snr", "first-step gradient SNR across group sizes");
  for (CLI::App* sub : {gen, calibrate, train, eval, sensitivity, snr}) {
    add_common(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(args);
    if (calibrate->parsed()) return cmd_calibrate(args);
    if (train->parsed()) return cmd_train(args);
    if (eval->parsed()) return cmd_eval(args);
    if (sensitivity->parsed()) return cmd_sensitivity(args);
    if (snr->parsed()) return cmd_snr(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CalibrationError& e) {
    std::cerr << "calibration infeasible: " << e.what() << "\n";
    return 3;
  } catch (const SensitivityViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
