#include "dpgcl/sensitivity.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dpgcl/errors.hpp"
#include "dpgcl/parallel.hpp"
#include "dpgcl/rng.hpp"

namespace dpgcl {

namespace {

constexpr int kTrialAnchorDim = 6;
constexpr int kTrialPositiveDim = 5;  // dual-modal positives
constexpr int kTrialEmbedDim = 4;
constexpr double kAdversarialShrink = 1e-6;

Sample random_sample(int dim, Rng& rng) {
  Sample s;
  s.features.resize(dim);
  for (auto& x : s.features) x = rng.gaussian();
  return s;
}

// Base batch plus the extra neighbor pair, from one stream so the batch is a
// pure function of data_seed.
std::pair<PairBatch, PairSample> trial_batch(std::size_t B,
                                             std::uint64_t data_seed,
                                             bool dual) {
  Rng rng(StreamKind::kTrial, data_seed);
  PairBatch batch;
  const Modality modality = dual ? Modality::kDualModal : Modality::kUniModal;
  const int pos_dim = dual ? kTrialPositiveDim : kTrialAnchorDim;
  for (std::size_t i = 0; i <= B; ++i) {
    PairSample p;
    p.modality = modality;
    p.anchor = random_sample(kTrialAnchorDim, rng);
    p.positive = random_sample(pos_dim, rng);
    if (i < B) {
      batch.pairs.push_back(std::move(p));
      batch.source_indices.push_back(i);
    } else {
      return {std::move(batch), std::move(p)};
    }
  }
  return {};  // unreachable
}

EncoderSpec trial_spec(int input_dim, std::uint64_t init_seed) {
  EncoderSpec spec;
  spec.input_dim = input_dim;
  spec.hidden_dims = {8};
  spec.output_dim = kTrialEmbedDim;
  spec.activation = Activation::kTanh;
  spec.init_seed = static_cast<std::int64_t>(init_seed);
  return spec;
}

void shrink_last_layer(ParamVector& params, const EncoderSpec& spec) {
  const auto layout = layout_for(spec);
  // Last two spans are the final layer's weights and bias.
  for (std::size_t s = layout.size() - 2; s < layout.size(); ++s) {
    for (std::size_t i = 0; i < layout[s].length; ++i) {
      params.values[layout[s].offset + i] *= kAdversarialShrink;
    }
  }
}

}  // namespace

double theoretical_bound(ClipKind kind, std::size_t B, std::size_t K,
                         double C) {
  switch (kind) {
    case ClipKind::kSampleLevel:
      return (2.0 * static_cast<double>(B) + 1.0) * C;
    case ClipKind::kBatchLevel:
      return 2.0 * C;
    case ClipKind::kGroupClip:
      return (2.0 * static_cast<double>(K) + 1.0) * C;
    case ClipKind::kGroupNeg:
    case ClipKind::kGroupNegAug:
    case ClipKind::kGroupNegDual:
      return 2.0 * C;
    case ClipKind::kLogitDP: {
      const double e2 = std::exp(2.0);
      const double b = static_cast<double>(B);
      return 2.0 * (1.0 + (b - 2.0) * e2 / (e2 + b - 1.0)) * C;
    }
  }
  throw std::invalid_argument("unknown strategy");
}

SensitivityTrial run_trial(const ClipStrategy& strategy, std::size_t B,
                           std::size_t S, std::uint64_t encoder_seed,
                           std::uint64_t data_seed, bool adversarial,
                           double tau, std::size_t n_aug) {
  const bool quadratic = strategy.kind == ClipKind::kSampleLevel ||
                         strategy.kind == ClipKind::kLogitDP;
  if (quadratic ? B > 16 : B > 64) {
    throw std::invalid_argument("trial batch size over the desk-scale cap");
  }
  const bool dual = strategy.kind == ClipKind::kGroupNegDual;
  // The pairwise-clipping bound's e^2 constants assume unit temperature;
  // smaller tau rescales the similarity weights and the bound with them.
  if (strategy.kind == ClipKind::kLogitDP) tau = 1.0;

  auto [base, extra] = trial_batch(B, data_seed, dual);
  PairBatch neighbor = base;
  neighbor.pairs.push_back(extra);
  neighbor.source_indices.push_back(B);

  const GroupAssignment g = assign_groups(B, S, static_cast<std::int64_t>(data_seed), 0);
  const GroupAssignment g_prime = couple_neighbor(g, B, S);

  LossConfig cfg;
  cfg.tau = tau;
  cfg.S = S;
  cfg.n_aug = n_aug;
  cfg.aug = AugmentOp{AugmentKind::kContiguousMask, 0.2,
                      static_cast<std::int64_t>(data_seed)};
  cfg.modality = dual ? Modality::kDualModal : Modality::kUniModal;

  ParamVector diff;
  if (dual) {
    const EncoderSpec spec1 = trial_spec(kTrialAnchorDim, encoder_seed);
    const EncoderSpec spec2 = trial_spec(kTrialPositiveDim, encoder_seed + 1);
    ParamVector p1 = init_params(spec1);
    ParamVector p2 = init_params(spec2);
    if (adversarial) {
      shrink_last_layer(p1, spec1);
      shrink_last_layer(p2, spec2);
    }
    diff = bounded_gradient_dual(strategy, p1, p2, spec1, spec2, base, g, cfg)
               .sum;
    const ParamVector other =
        bounded_gradient_dual(strategy, p1, p2, spec1, spec2, neighbor,
                              g_prime, cfg)
            .sum;
    for (std::size_t i = 0; i < diff.size(); ++i) {
      diff.values[i] -= other.values[i];
    }
  } else {
    const EncoderSpec spec = trial_spec(kTrialAnchorDim, encoder_seed);
    ParamVector params = init_params(spec);
    if (adversarial) shrink_last_layer(params, spec);
    diff = bounded_gradient(strategy, params, spec, base, g, cfg).sum;
    const ParamVector other =
        bounded_gradient(strategy, params, spec, neighbor, g_prime, cfg).sum;
    for (std::size_t i = 0; i < diff.size(); ++i) {
      diff.values[i] -= other.values[i];
    }
  }

  SensitivityTrial trial;
  trial.strategy = strategy;
  trial.B = B;
  trial.S = S;
  trial.K = g.K;
  trial.encoder_seed = encoder_seed;
  trial.data_seed = data_seed;
  trial.adversarial = adversarial;
  trial.measured = l2_norm(diff.values);
  trial.bound = theoretical_bound(strategy.kind, B, g.K, strategy.C);
  return trial;
}

SweepReport sweep(const std::vector<ClipKind>& strategies,
                  const std::vector<std::size_t>& batch_sizes,
                  const std::vector<std::size_t>& group_sizes,
                  const std::vector<double>& clip_norms,
                  std::size_t trials_per_cell, std::uint64_t seed, double tau,
                  std::size_t n_aug) {
  struct Cell {
    ClipKind kind;
    std::size_t B, S;
    double C;
  };
  std::vector<Cell> cells;
  for (ClipKind kind : strategies) {
    for (std::size_t B : batch_sizes) {
      for (std::size_t S : group_sizes) {
        for (double C : clip_norms) cells.push_back({kind, B, S, C});
      }
    }
  }

  SweepReport report;
  report.cells.resize(cells.size());
  std::vector<std::string> violations(cells.size());
  parallel_for(cells.size(), [&](std::size_t ci) {
    const Cell& cell = cells[ci];
    SweepCell out;
    out.strategy = cell.kind;
    out.B = cell.B;
    out.S = cell.S;
    out.C = cell.C;
    const ClipStrategy strategy{cell.kind, cell.C};
    for (std::size_t t = 0; t < trials_per_cell; ++t) {
      const std::uint64_t enc_seed = mix_key(seed, 4 * (ci * trials_per_cell + t));
      const std::uint64_t data_seed =
          mix_key(seed, 4 * (ci * trials_per_cell + t) + 1);
      const bool adversarial = (t % 4) == 3;
      const SensitivityTrial trial = run_trial(
          strategy, cell.B, cell.S, enc_seed, data_seed, adversarial, tau, n_aug);
      out.K = trial.K;
      out.bound = trial.bound;
      if (trial.measured > out.max_measured) out.max_measured = trial.measured;
      if (trial.measured > trial.bound + kSensitivityTolerance &&
          violations[ci].empty()) {
        std::ostringstream msg;
        msg << "sensitivity bound violated: strategy=" << to_string(cell.kind)
            << " B=" << cell.B << " S=" << cell.S << " C=" << cell.C
            << " measured=" << trial.measured << " bound=" << trial.bound
            << " encoder_seed=" << enc_seed << " data_seed=" << data_seed
            << " adversarial=" << (adversarial ? 1 : 0);
        violations[ci] = msg.str();
      }
    }
    out.ratio = out.bound > 0.0 ? out.max_measured / out.bound : 0.0;
    report.cells[ci] = out;
  });
  for (const auto& v : violations) {
    if (!v.empty()) throw SensitivityViolation(v);
  }
  return report;
}

}  // namespace dpgcl
