#include "dpgcl/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "dpgcl/errors.hpp"
#include "dpgcl/grouping.hpp"
#include "dpgcl/sensitivity.hpp"

namespace dpgcl {

namespace {

bool is_group_divided(ClipKind kind) {
  return kind == ClipKind::kGroupClip || kind == ClipKind::kGroupNeg ||
         kind == ClipKind::kGroupNegAug || kind == ClipKind::kGroupNegDual;
}

// Noise sensitivity per strategy at the realized batch. The group family
// keeps the 2C group sensitivity (group_clip uses its own (2K+1)C); the baselines
// use their published sensitivities so cross-strategy comparisons stay
// privacy-fair. Floored at 2C so degenerate tiny batches never shrink the
// noise below the batch-level scale.
double noise_sensitivity(ClipKind kind, std::size_t B, std::size_t K,
                         double C) {
  double sens = 2.0 * C;
  switch (kind) {
    case ClipKind::kSampleLevel:
      sens = (2.0 * static_cast<double>(B) + 1.0) * C;
      break;
    case ClipKind::kGroupClip:
      sens = (2.0 * static_cast<double>(K) + 1.0) * C;
      break;
    case ClipKind::kLogitDP:
      sens = (2.0 + 2.0 * std::exp(2.0)) * C;
      break;
    default:
      break;
  }
  return std::max(sens, 2.0 * C);
}

void validate(const Dataset& ds, const TrainConfig& cfg) {
  const bool dual = cfg.strategy.kind == ClipKind::kGroupNegDual;
  if (dual != (ds.modality == Modality::kDualModal) ||
      dual != (cfg.loss.modality == Modality::kDualModal)) {
    throw ConfigError("strategy, loss, and dataset modalities disagree");
  }
  if (cfg.T < 0) throw ConfigError("T must be >= 0");
  if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be > 0");
  if (cfg.sigma < 0.0) throw ConfigError("sigma must be >= 0");
  if (cfg.encoder1.input_dim != ds.d_x) {
    throw ConfigError("encoder input dim does not match dataset");
  }
  if (dual && cfg.encoder2.input_dim != ds.d_x2) {
    throw ConfigError("second encoder input dim does not match dataset");
  }

  if (!cfg.certificate.has_value()) {
    throw ConfigError(
        "training requires a privacy certificate for (q, sigma, T)");
  }
  const PrivacyCertificate& cert = *cfg.certificate;
  if (cert.q != cfg.q || cert.sigma != cfg.sigma || cert.T != cfg.T) {
    throw ConfigError("privacy certificate does not match (q, sigma, T)");
  }
  const double eps =
      certified_epsilon(cfg.q, cfg.sigma, cfg.T, cert.delta, default_orders());
  if (!(eps <= cert.epsilon + 1e-9) &&
      !(std::isinf(eps) && std::isinf(cert.epsilon))) {
    throw ConfigError("privacy certificate does not certify this run");
  }
}

}  // namespace

void optimizer_step(OptimizerState& state, ParamVector& params,
                    const ParamVector& pseudo_grad, const TrainConfig& cfg) {
  if (pseudo_grad.size() != params.size()) {
    throw std::invalid_argument("gradient/parameter shape mismatch");
  }
  if (cfg.optimizer == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params.values[i] -= cfg.lr * pseudo_grad.values[i];
    }
    return;
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.t = 0;
  }
  state.t += 1;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = pseudo_grad.values[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params.values[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
  validate(ds, cfg);
  const bool dual = cfg.strategy.kind == ClipKind::kGroupNegDual;

  ParamVector p1 = init_params(cfg.encoder1);
  ParamVector p2;
  ParamVector working;  // the vector the optimizer owns
  if (dual) {
    p2 = init_params(cfg.encoder2);
    working = concat_params(p1, p2);
  } else {
    working = p1;
  }
  const std::size_t first_len = p1.size();

  OptimizerState opt;
  TrainResult result;
  result.metrics.reserve(static_cast<std::size_t>(cfg.T));

  LossConfig loss_cfg = cfg.loss;
  loss_cfg.aug.seed = cfg.master_seed;  // augment stream is master-derived

  for (std::int64_t t = 0; t < cfg.T; ++t) {
    const PairBatch batch = poisson_subsample(ds, cfg.q, cfg.master_seed, t);
    const std::size_t B = batch.size();

    ParamVector sum = zeros_like(working);
    std::size_t divisor = 1;
    double sensitivity = 2.0 * cfg.strategy.C;
    BoundStats stats;

    if (B > 0) {
      const GroupAssignment groups =
          assign_groups(B, std::max<std::size_t>(1, cfg.loss.S),
                        cfg.master_seed, t);
      BoundedGradient bounded;
      if (dual) {
        split_params(working, first_len, p1, p2);
        bounded = bounded_gradient_dual(cfg.strategy, p1, p2, cfg.encoder1,
                                        cfg.encoder2, batch, groups, loss_cfg,
                                        &stats);
      } else {
        bounded = bounded_gradient(cfg.strategy, working, cfg.encoder1, batch,
                                   groups, loss_cfg, &stats);
      }
      sum = std::move(bounded.sum);
      divisor = is_group_divided(cfg.strategy.kind) ? bounded.k_effective : B;
      sensitivity =
          noise_sensitivity(cfg.strategy.kind, B, groups.K, cfg.strategy.C);
    }

    const NoisySummary summary = noisy_update_with_sensitivity(
        sum, divisor, sensitivity, cfg.sigma, cfg.master_seed, t);

    MetricsRow row;
    row.step = t;
    row.loss = stats.loss;
    row.snr = summary.snr;
    row.clip_fraction =
        stats.clip_units == 0
            ? 0.0
            : static_cast<double>(stats.clipped_units) / stats.clip_units;
    row.grad_norm = l2_norm(summary.clean_sum.values);
    row.noise_norm = l2_norm(summary.noise.values);
    result.metrics.push_back(row);

    // After this point the batch influences the update only through the
    // noisy sum.
    optimizer_step(opt, working, summary.noisy_update, cfg);
  }

  if (dual) {
    split_params(working, first_len, p1, p2);
    p1.layout = layout_for(cfg.encoder1);
    p2.layout = layout_for(cfg.encoder2);
    result.params1 = std::move(p1);
    result.params2 = std::move(p2);
  } else {
    result.params1 = std::move(working);
  }
  return result;
}

}  // namespace dpgcl
