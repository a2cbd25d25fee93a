// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Pass --cli <path> to enable the CLI determinism criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dpgcl/accountant.hpp"
#include "dpgcl/dataset.hpp"
#include "dpgcl/errors.hpp"
#include "dpgcl/eval.hpp"
#include "dpgcl/rng.hpp"
#include "dpgcl/sensitivity.hpp"
#include "dpgcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace dpgcl;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail, double seconds) {
  std::printf("[%s] criterion %d: %s (%.1fs) %s\n", pass ? "PASS" : "FAIL",
              criterion, name.c_str(), seconds, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

PairBatch random_uni_batch(std::size_t B, int d, std::uint64_t seed) {
  Rng rng(StreamKind::kTrial, seed);
  PairBatch batch;
  for (std::size_t i = 0; i < B; ++i) {
    PairSample p;
    p.modality = Modality::kUniModal;
    p.anchor.features.resize(d);
    p.positive.features.resize(d);
    for (auto& x : p.anchor.features) x = rng.gaussian();
    for (auto& x : p.positive.features) x = rng.gaussian();
    batch.pairs.push_back(std::move(p));
    batch.source_indices.push_back(i);
  }
  return batch;
}

PairBatch random_dual_batch(std::size_t B, int d1, int d2,
                            std::uint64_t seed) {
  Rng rng(StreamKind::kTrial, seed);
  PairBatch batch;
  for (std::size_t i = 0; i < B; ++i) {
    PairSample p;
    p.modality = Modality::kDualModal;
    p.anchor.features.resize(d1);
    p.positive.features.resize(d2);
    for (auto& x : p.anchor.features) x = rng.gaussian();
    for (auto& x : p.positive.features) x = rng.gaussian();
    batch.pairs.push_back(std::move(p));
    batch.source_indices.push_back(i);
  }
  return batch;
}

// ------------------------------------------------------------- crit 1

void criterion1_sensitivity_bounds() {
  const auto start = Clock::now();
  const std::vector<ClipKind> strategies{
      ClipKind::kSampleLevel, ClipKind::kBatchLevel,  ClipKind::kGroupClip,
      ClipKind::kGroupNeg,    ClipKind::kGroupNegAug, ClipKind::kGroupNegDual,
      ClipKind::kLogitDP};
  bool pass = true;
  std::string detail;
  try {
    const SweepReport report =
        sweep(strategies, {4, 8, 16}, {1, 2, 4, 8}, {0.1, 1.0}, 200, 20250809,
              0.1, 1);
    double worst = 0.0;
    for (const auto& cell : report.cells) worst = std::max(worst, cell.ratio);
    detail = std::to_string(report.cells.size()) +
             " cells x 200 trials, worst measured/bound = " + fmt(worst);
  } catch (const SensitivityViolation& e) {
    pass = false;
    detail = e.what();
  }
  const double secs = seconds_since(start);
  if (secs >= 300.0) {
    pass = false;
    detail += " [exceeded 5 min budget]";
  }
  report(1, "sensitivity bounds hold on coupled neighboring batches", pass,
         detail, secs);
}

// ------------------------------------------------------------- crit 2

void criterion2_degenerate_equivalences() {
  const auto start = Clock::now();
  bool pass = true;
  std::string detail = "50 instances bitwise";
  for (std::uint64_t t = 0; t < 50 && pass; ++t) {
    const std::size_t B = 2 + t % 11;
    const EncoderSpec spec = [&] {
      EncoderSpec s;
      s.input_dim = 5;
      s.hidden_dims = {6};
      s.output_dim = 4;
      s.init_seed = static_cast<std::int64_t>(t);
      return s;
    }();
    const ParamVector params = init_params(spec);
    const PairBatch batch = random_uni_batch(B, 5, 7000 + t);
    LossConfig cfg;
    cfg.tau = 0.2;

    const GroupAssignment whole = assign_groups(B, B, 1, static_cast<std::int64_t>(t));
    const BoundedGradient gn = bounded_gradient({ClipKind::kGroupNeg, 0.7},
                                                params, spec, batch, whole, cfg);
    const BoundedGradient bl = bounded_gradient({ClipKind::kBatchLevel, 0.7},
                                                params, spec, batch, whole, cfg);
    const GroupAssignment singles = assign_groups(B, 1, 1, static_cast<std::int64_t>(t));
    const BoundedGradient gc = bounded_gradient({ClipKind::kGroupClip, 0.7},
                                                params, spec, batch, singles, cfg);
    const BoundedGradient sl = bounded_gradient({ClipKind::kSampleLevel, 0.7},
                                                params, spec, batch, singles, cfg);
    if (gn.sum.values != bl.sum.values) {
      pass = false;
      detail = "GroupNeg(S=B) != BatchLevel at instance " + std::to_string(t);
    }
    if (gc.sum.values != sl.sum.values) {
      pass = false;
      detail = "GroupClip(S=1) != SampleLevel at instance " + std::to_string(t);
    }
  }
  report(2, "S=B and S=1 degenerate to batch- and sample-level bitwise", pass,
         detail, seconds_since(start));
}

// ------------------------------------------------------------- crit 3

double fd_loss(const std::function<double(const ParamVector&)>& loss,
               ParamVector params, std::size_t coord, double h = 1e-5) {
  const double saved = params.values[coord];
  params.values[coord] = saved + h;
  const double up = loss(params);
  params.values[coord] = saved - h;
  const double down = loss(params);
  return (up - down) / (2.0 * h);
}

double worst_fd_error(const std::function<double(const ParamVector&)>& loss,
                      const ParamVector& params, const ParamVector& grad,
                      std::uint64_t seed) {
  Rng rng(StreamKind::kTrial, seed);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t coord = rng.below(params.size());
    const double fd = fd_loss(loss, params, coord);
    const double a = grad.values[coord];
    const double err =
        std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
    worst = std::max(worst, err);
  }
  return worst;
}

void criterion3_gradient_correctness() {
  const auto start = Clock::now();
  double worst = 0.0;
  const double tau = 0.4;
  const AugmentOp aug{AugmentKind::kContiguousMask, 0.25, 99};

  for (std::uint64_t inst = 0; inst < 10; ++inst) {
    const std::size_t B = 4 + inst % 3;
    EncoderSpec spec;
    spec.input_dim = 4;
    spec.hidden_dims = {5};
    spec.output_dim = 3;
    spec.init_seed = static_cast<std::int64_t>(100 + inst);
    const ParamVector params = init_params(spec);
    const PairBatch batch = random_uni_batch(B, 4, 8000 + inst);
    const GroupAssignment groups = assign_groups(B, 2, 3, static_cast<std::int64_t>(inst));

    {  // full-batch InfoNCE
      const auto [loss, grad] = infonce_full_batch(params, spec, batch, tau);
      worst = std::max(
          worst, worst_fd_error(
                     [&](const ParamVector& p) {
                       return infonce_full_batch(p, spec, batch, tau).first;
                     },
                     params, grad, inst));
    }
    {  // group-local
      const GroupLossResult r = group_infonce(params, spec, batch, groups, tau);
      ParamVector total = zeros_like(params);
      for (const auto& g : r.per_group_grad) {
        for (std::size_t i = 0; i < total.size(); ++i) {
          total.values[i] += g.values[i];
        }
      }
      worst = std::max(
          worst,
          worst_fd_error(
              [&](const ParamVector& p) {
                return group_infonce(p, spec, batch, groups, tau).total_loss();
              },
              params, total, 50 + inst));
    }
    {  // group-local with augmentation
      const GroupLossResult r =
          group_infonce_aug(params, spec, batch, groups, tau, 2, aug);
      ParamVector total = zeros_like(params);
      for (const auto& g : r.per_group_grad) {
        for (std::size_t i = 0; i < total.size(); ++i) {
          total.values[i] += g.values[i];
        }
      }
      worst = std::max(
          worst, worst_fd_error(
                     [&](const ParamVector& p) {
                       return group_infonce_aug(p, spec, batch, groups, tau, 2,
                                                aug)
                           .total_loss();
                     },
                     params, total, 100 + inst));
    }
    {  // dual-modal
      EncoderSpec spec2 = spec;
      spec2.input_dim = 6;
      spec2.init_seed = static_cast<std::int64_t>(200 + inst);
      const ParamVector params2 = init_params(spec2);
      const PairBatch dual = random_dual_batch(B, 4, 6, 9000 + inst);
      const GroupLossResult r =
          group_infonce_dual(params, params2, spec, spec2, dual, groups, tau);
      ParamVector total = r.per_group_grad[0];
      for (std::size_t k = 1; k < r.per_group_grad.size(); ++k) {
        for (std::size_t i = 0; i < total.size(); ++i) {
          total.values[i] += r.per_group_grad[k].values[i];
        }
      }
      const ParamVector joint = concat_params(params, params2);
      const std::size_t split = params.size();
      worst = std::max(
          worst,
          worst_fd_error(
              [&](const ParamVector& p) {
                ParamVector a = params, b = params2;
                split_params(p, split, a, b);
                return group_infonce_dual(a, b, spec, spec2, dual, groups, tau)
                    .total_loss();
              },
              joint, total, 150 + inst));
    }
  }
  report(3, "analytic gradients match finite differences (rel err < 1e-4)",
         worst < 1e-4, "worst relative error = " + fmt(worst),
         seconds_since(start));
}

// ------------------------------------------------------------- crit 4

void criterion4_accountant() {
  const auto start = Clock::now();
  bool pass = true;
  std::string detail;

  double worst_q1 = 0.0;
  for (double sigma : {0.5, 1.0, 2.0, 5.0}) {
    for (int alpha = 2; alpha <= 64; ++alpha) {
      worst_q1 = std::max(worst_q1,
                          std::abs(rdp_subsampled_gaussian(1.0, sigma, alpha) -
                                   rdp_gaussian(sigma, alpha)));
    }
  }
  if (worst_q1 > 1e-9) {
    pass = false;
    detail += "q=1 mismatch " + fmt(worst_q1) + "; ";
  }

  RdpCurve curve;
  curve.orders = default_orders();
  for (int a : curve.orders) curve.rho.push_back(rdp_gaussian(1.0, a));
  const DpConversion got = rdp_to_dp(curve, 1e-5);
  double oracle = 1e300;
  for (int a = 2; a <= 64; ++a) {
    oracle = std::min(oracle, a / 2.0 + std::log(1e5) / (a - 1.0));
  }
  if (std::abs(got.epsilon - oracle) > 1e-6) {
    pass = false;
    detail += "rdp_to_dp oracle mismatch; ";
  }

  PrivacySpec spec;
  spec.epsilon_target = 1.0;
  spec.delta = 1e-6;
  spec.q = 0.01;
  spec.T = 100;
  const double sigma = calibrate_sigma(spec);
  const auto orders = default_orders();
  const double eps_at =
      certified_epsilon(spec.q, sigma, spec.T, spec.delta, orders);
  const double eps_below = certified_epsilon(spec.q, sigma - kSigmaPrecision,
                                             spec.T, spec.delta, orders);
  if (!(eps_at <= 1.0) || !(eps_below > 1.0)) {
    pass = false;
    detail += "calibration not minimal; ";
  }
  detail += "sigma* = " + fmt(sigma) + ", eps(sigma*) = " + fmt(eps_at) +
            ", eps(sigma*-1e-3) = " + fmt(eps_below);

  const double secs = seconds_since(start);
  if (secs >= 30.0) {
    pass = false;
    detail += " [exceeded 30 s budget]";
  }
  report(4, "accountant matches closed forms and calibrates minimally", pass,
         detail, secs);
}

// -------------------------------------------------- crit 5/6 (SNR)

struct SnrStudy {
  Dataset data;
  PairBatch batch;

  explicit SnrStudy(std::size_t B) {
    data = generate_unimodal(10, 26, 16, 2.5, 1.0, 7);
    for (std::size_t i = 0; i < B; ++i) {
      batch.pairs.push_back(data.pairs[i]);
      batch.source_indices.push_back(i);
    }
  }

  double mean_snr(std::size_t S, std::size_t n_aug, int seeds) const {
    const double C = 0.5, tau = 0.1, sigma = 1.0;
    double total = 0.0;
    for (int s = 0; s < seeds; ++s) {
      EncoderSpec spec;
      spec.input_dim = 16;
      spec.output_dim = 16;
      spec.init_seed = 40 + s;
      const ParamVector params = init_params(spec);
      const GroupAssignment groups =
          assign_groups(batch.size(), S, 40 + s, 0);
      LossConfig cfg;
      cfg.tau = tau;
      cfg.S = S;
      cfg.n_aug = n_aug;
      cfg.aug = AugmentOp{AugmentKind::kContiguousMask, 0.2, 40 + s};
      const ClipStrategy strategy{
          n_aug > 0 ? ClipKind::kGroupNegAug : ClipKind::kGroupNeg, C};
      const BoundedGradient bounded =
          bounded_gradient(strategy, params, spec, batch, groups, cfg);
      total += privatized_step(bounded.sum, bounded.k_effective, C, sigma,
                               40 + s, 0)
                   .snr;
    }
    return total / static_cast<double>(seeds);
  }
};

void criterion5_snr_trend(const SnrStudy& study) {
  const auto start = Clock::now();
  const std::vector<std::size_t> sizes{2, 8, 32, 128, 256};
  std::vector<double> means;
  for (std::size_t S : sizes) means.push_back(study.mean_snr(S, 0, 20));
  bool pass = true;
  std::string detail = "mean SNR over 20 seeds:";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    detail += " S=" + std::to_string(sizes[i]) + ":" + fmt(means[i]);
    if (i > 0 && !(means[i] < means[i - 1])) pass = false;
  }
  report(5, "first-step gradient SNR strictly decreases with group size", pass,
         detail, seconds_since(start));
}

void criterion6_aug_snr_gain(const SnrStudy& study) {
  const auto start = Clock::now();
  bool pass = true;
  std::string detail;
  for (std::size_t S : {2, 4}) {
    const double without = study.mean_snr(S, 0, 20);
    const double with_aug = study.mean_snr(S, 1, 20);
    detail += "S=" + std::to_string(S) + ": " + fmt(with_aug) +
              " vs " + fmt(without) + "  ";
    if (!(with_aug >= without)) pass = false;
  }
  report(6, "intra-group augmentation does not lower the gradient SNR", pass,
         detail, seconds_since(start));
}

// -------------------------------------------- crit 7/8 (utility)

struct UtilityStudy {
  Dataset train_ds;
  Dataset test_ds;
  double sigma = 0.0;
  double delta = 0.0;
  static constexpr double kQ = 0.05;
  static constexpr std::int64_t kSteps = 300;

  UtilityStudy() {
    const Dataset full = generate_unimodal(10, 600, 16, 2.5, 1.0, 100);
    auto [train, test] = split_dataset(full, 500);
    train_ds = std::move(train);
    test_ds = std::move(test);
    delta = default_delta(static_cast<std::int64_t>(train_ds.n()));
    PrivacySpec spec;
    spec.epsilon_target = 10.0;
    spec.delta = delta;
    spec.q = kQ;
    spec.T = kSteps;
    sigma = calibrate_sigma(spec);
  }

  double knn_for(ClipKind kind, std::size_t S, std::size_t n_aug,
                 std::int64_t seed) const {
    TrainConfig cfg;
    cfg.strategy = {kind, 1.0};
    cfg.loss.tau = 0.2;
    cfg.loss.S = S;
    cfg.loss.n_aug = n_aug;
    cfg.loss.aug = AugmentOp{AugmentKind::kContiguousMask, 0.2, seed};
    cfg.optimizer = OptimizerKind::kAdam;
    cfg.lr = 3e-3;
    cfg.T = kSteps;
    cfg.q = kQ;
    cfg.sigma = sigma;
    cfg.encoder1.input_dim = 16;
    cfg.encoder1.output_dim = 16;
    cfg.encoder1.init_seed = seed;
    cfg.master_seed = seed;
    cfg.certificate = certify(kQ, sigma, kSteps, delta);
    const TrainResult r = train(train_ds, cfg);
    const EmbedSet tr = embed_anchors(train_ds, r.params1, cfg.encoder1);
    const EmbedSet te = embed_anchors(test_ds, r.params1, cfg.encoder1);
    return knn_accuracy(tr, te, 3);
  }
};

void criteria7_8_utility(bool& pass7, std::string& detail7, bool& pass8,
                         std::string& detail8, double& secs) {
  const auto start = Clock::now();
  const UtilityStudy study;
  const int seeds = 5;

  std::vector<double> dpgcl, batch, sample, s1, sB;
  for (int s = 0; s < seeds; ++s) {
    dpgcl.push_back(study.knn_for(ClipKind::kGroupNegAug, 4, 1, s));
    batch.push_back(study.knn_for(ClipKind::kBatchLevel, 4, 0, s));
    sample.push_back(study.knn_for(ClipKind::kSampleLevel, 4, 0, s));
    s1.push_back(study.knn_for(ClipKind::kGroupNegAug, 1, 1, s));
    sB.push_back(study.knn_for(ClipKind::kGroupNegAug, study.train_ds.n(), 1, s));
  }
  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };

  int wins_batch = 0, wins_sample = 0;
  for (int s = 0; s < seeds; ++s) {
    if (dpgcl[s] > batch[s]) ++wins_batch;
    if (dpgcl[s] > sample[s]) ++wins_sample;
  }
  // one-sided sign test: all 5 of 5 wins gives p = 0.5^5 = 0.03125 < 0.05
  const double p_batch = std::pow(0.5, wins_batch) *
                         (wins_batch == seeds ? 1.0 : 1e9);
  const double p_sample = std::pow(0.5, wins_sample) *
                          (wins_sample == seeds ? 1.0 : 1e9);
  pass7 = wins_batch == seeds && wins_sample == seeds &&
          mean(dpgcl) > mean(batch) && mean(dpgcl) > mean(sample);
  {
    std::ostringstream os;
    os << "kNN means: dpgcl=" << fmt(mean(dpgcl)) << " batch=" << fmt(mean(batch))
       << " sample=" << fmt(mean(sample)) << "; wins " << wins_batch << "/5 and "
       << wins_sample << "/5, sign-test p=" << fmt(std::min(p_batch, 1.0))
       << "/" << fmt(std::min(p_sample, 1.0));
    detail7 = os.str();
  }

  pass8 = mean(dpgcl) > std::max(mean(s1), mean(sB));
  {
    std::ostringstream os;
    os << "mean acc: S=1:" << fmt(mean(s1)) << " S=4:" << fmt(mean(dpgcl))
       << " S=B:" << fmt(mean(sB));
    detail8 = os.str();
  }
  secs = seconds_since(start);
  if (secs >= 900.0) {
    pass7 = false;
    detail7 += " [exceeded 15 min budget]";
  }
}

// ------------------------------------------------------------- crit 9

void criterion9_logitdp_cost() {
  const auto start = Clock::now();
  bool pass = true;
  std::string detail;
  for (std::size_t B : {4, 8, 16}) {
    EncoderSpec spec;
    spec.input_dim = 5;
    spec.hidden_dims = {4};
    spec.output_dim = 3;
    spec.init_seed = 3;
    const ParamVector params = init_params(spec);
    const PairBatch batch = random_uni_batch(B, 5, 600 + B);
    const GroupAssignment groups = assign_groups(B, 2, 1, 0);
    LossConfig cfg;
    cfg.tau = 1.0;
    BoundStats stats;
    bounded_gradient({ClipKind::kLogitDP, 1.0}, params, spec, batch, groups,
                     cfg, &stats);
    detail += "B=" + std::to_string(B) + ":" +
              std::to_string(stats.pair_grad_evals) + " ";
    if (stats.pair_grad_evals != B * B) pass = false;
  }
  report(9, "pairwise-gradient evaluation count is exactly B^2", pass, detail,
         seconds_since(start));
}

// ------------------------------------------------------------ crit 10

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> files_a;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files_a.push_back(fs::relative(e.path(), a));
  }
  std::sort(files_a.begin(), files_a.end());
  for (const auto& rel : files_a) {
    if (!fs::exists(b / rel)) {
      why = "missing " + rel.string();
      return false;
    }
    if (slurp(a / rel) != slurp(b / rel)) {
      why = "differs: " + rel.string();
      return false;
    }
  }
  return true;
}

void criterion10_cli_determinism(const std::string& cli) {
  const auto start = Clock::now();
  if (cli.empty()) {
    report(10, "CLI reruns are byte-identical", false,
           "no --cli path provided", seconds_since(start));
    return;
  }
  const fs::path work = fs::absolute("acceptance_cli_work");
  fs::remove_all(work);
  fs::create_directories(work);

  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(work / name);
    out << body;
  };
  write("gen.cfg",
        "run_id = acc\nmodality = uni\nnum_classes = 4\nper_class = 30\n"
        "test_per_class = 10\nd_x = 8\nseparation = 2.5\nnoise_std = 1.0\n"
        "dataset_seed = 5\n");
  write("cal.cfg",
        "run_id = acc\nepsilon = 2.0\ndelta = 1e-6\nq = 0.02\nsteps = 50\n");
  write("train.cfg",
        "run_id = acc\ndataset = DIR/acc.data.txt\nstrategy = group_neg_aug\n"
        "clip_norm = 1.0\ntau = 0.2\ngroup_size = 4\nn_aug = 1\n"
        "optimizer = adam\nlr = 3e-3\nsteps = 10\nq = 0.3\nsigma = 1.5\n"
        "d_z = 8\nmaster_seed = 3\n");
  write("eval.cfg",
        "run_id = acc\ntrain_data = DIR/acc.data.txt\n"
        "test_data = DIR/acc.test.txt\ncheckpoint = DIR/acc.params1.ckpt\n"
        "d_z = 8\nknn_k = 3\nprobe_epochs = 50\nmaster_seed = 3\n");
  write("sens.cfg",
        "run_id = acc\nstrategies = group_neg, group_neg_aug, batch\n"
        "batch_sizes = 4, 6\ngroup_sizes = 2, 4\nclip_norms = 1.0\n"
        "trials = 10\ntau = 0.1\nn_aug = 1\n");
  write("snr.cfg",
        "run_id = acc\ndataset = DIR/acc.data.txt\nbatch_size = 32\n"
        "clip_norm = 0.5\ntau = 0.1\ngroup_sizes = 2, 8\nn_aug_values = 0, 1\n"
        "sigma = 1.0\nseeds = 4\nd_z = 8\n");

  bool pass = true;
  std::string detail = "gen calibrate train eval sensitivity-check snr";
  for (const std::string dir : {"a", "b"}) {
    const fs::path out = work / dir;
    fs::create_directories(out);
    // The second pass additionally runs single-threaded; outputs must not
    // depend on the parallelism degree.
    const std::string env_prefix = dir == "b" ? "DPGCL_THREADS=1 " : "";
    const auto run = [&](const std::string& sub, const std::string& cfg_name) {
      // configs reference files inside the out dir; materialize per run
      std::string body = slurp(work / cfg_name);
      std::string patched;
      for (std::size_t i = 0; i < body.size();) {
        if (body.compare(i, 3, "DIR") == 0) {
          patched += out.string();
          i += 3;
        } else {
          patched += body[i++];
        }
      }
      const fs::path cfg_path = out / cfg_name;
      std::ofstream(cfg_path) << patched;
      const std::string cmd = env_prefix + cli + " " + sub + " --config " +
                              cfg_path.string() + " --out " + out.string() +
                              " > " + (out / (sub + ".stdout.txt")).string() +
                              " 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        pass = false;
        detail = sub + " exited nonzero";
      }
    };
    run("gen", "gen.cfg");
    run("calibrate", "cal.cfg");
    run("train", "train.cfg");
    run("eval", "eval.cfg");
    run("sensitivity-check", "sens.cfg");
    run("snr", "snr.cfg");
  }
  if (pass) {
    // stdout of train/eval embeds absolute paths; compare data files and the
    // path-free stdouts
    for (const std::string dir : {"a", "b"}) {
      for (const std::string f : {"train.stdout.txt", "eval.stdout.txt",
                                  "gen.stdout.txt"}) {
        // strip path-bearing lines ("wrote ...") before comparison
        const fs::path p = work / dir / f;
        std::istringstream in(slurp(p));
        std::ostringstream kept;
        std::string line;
        while (std::getline(in, line)) {
          if (line.rfind("wrote ", 0) != 0) kept << line << '\n';
        }
        std::ofstream(p) << kept.str();
      }
      // per-run configs embed the out dir; exclude them from the comparison
      for (const std::string f :
           {"gen.cfg", "cal.cfg", "train.cfg", "eval.cfg", "sens.cfg",
            "snr.cfg"}) {
        fs::remove(work / dir / f);
      }
    }
    std::string why;
    if (!dirs_identical(work / "a", work / "b", why)) {
      pass = false;
      detail = why;
    }
  }
  report(10, "CLI reruns are byte-identical", pass, detail,
         seconds_since(start));
  if (pass) fs::remove_all(work);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }

  criterion1_sensitivity_bounds();
  criterion2_degenerate_equivalences();
  criterion3_gradient_correctness();
  criterion4_accountant();

  const SnrStudy snr_study(256);
  criterion5_snr_trend(snr_study);
  criterion6_aug_snr_gain(snr_study);

  bool pass7 = false, pass8 = false;
  std::string detail7, detail8;
  double secs78 = 0.0;
  criteria7_8_utility(pass7, detail7, pass8, detail8, secs78);
  report(7, "group strategy beats batch- and sample-level at epsilon=10",
         pass7, detail7, secs78);
  report(8, "accuracy over S is inverted-U shaped", pass8, detail8, 0.0);

  criterion9_logitdp_cost();
  criterion10_cli_determinism(cli);

  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
