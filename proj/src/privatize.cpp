#include "dpgcl/privatize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpgcl/rng.hpp"

namespace dpgcl {

namespace {

constexpr std::size_t kLogitDpMaxBatch = 64;

void add_into(ParamVector& acc, const ParamVector& v) {
  if (acc.values.empty()) {
    acc = v;
    return;
  }
  if (acc.size() != v.size()) {
    throw std::invalid_argument("parameter length mismatch in reduction");
  }
  for (std::size_t i = 0; i < v.size(); ++i) acc.values[i] += v.values[i];
}

// Clips in place and reports whether the norm exceeded C.
bool clip_in_place(ParamVector& v, double C) {
  const double norm = l2_norm(v.values);
  if (norm <= C || norm == 0.0) return false;
  const double scale = C / norm;
  for (auto& x : v.values) x *= scale;
  return true;
}

void tally_clip(BoundStats* stats, bool clipped) {
  if (!stats) return;
  stats->clip_units += 1;
  if (clipped) stats->clipped_units += 1;
}

BoundedGradient logitdp_gradient(const ClipStrategy& strategy,
                                 const ParamVector& params,
                                 const EncoderSpec& spec,
                                 const PairBatch& batch, double tau,
                                 BoundStats* stats) {
  const std::size_t B = batch.size();
  if (B > kLogitDpMaxBatch) {
    throw std::invalid_argument(
        "LogitDP is limited to B <= 64; its pairwise clipping cost is O(B^2)");
  }

  Matrix xa(B, batch.pairs.front().anchor.features.size());
  Matrix xp(B, batch.pairs.front().positive.features.size());
  for (std::size_t r = 0; r < B; ++r) {
    const auto& a = batch.pairs[r].anchor.features;
    const auto& p = batch.pairs[r].positive.features;
    std::copy(a.begin(), a.end(), xa.row(r).begin());
    std::copy(p.begin(), p.end(), xp.row(r).begin());
  }
  ForwardTape tape_a, tape_p;
  const Matrix za = forward(params, spec, xa, &tape_a);
  const Matrix zp = forward(params, spec, xp, &tape_p);

  Matrix s(B, B);
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t j = 0; j < B; ++j) {
      s.at(i, j) = cosine_similarity(za.row(i), zp.row(j));
    }
  }

  // dL/ds_ij of the full-batch InfoNCE loss.
  Matrix w(B, B);
  double loss = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    double mx = s.at(i, 0) / tau;
    for (std::size_t j = 0; j < B; ++j) mx = std::max(mx, s.at(i, j) / tau);
    double denom = 0.0;
    for (std::size_t j = 0; j < B; ++j) denom += std::exp(s.at(i, j) / tau - mx);
    loss += -s.at(i, i) / tau + (mx + std::log(denom));
    for (std::size_t j = 0; j < B; ++j) {
      w.at(i, j) = std::exp(s.at(i, j) / tau - mx) / denom / tau;
    }
    w.at(i, i) -= 1.0 / tau;
  }
  if (stats) stats->loss = loss;

  const std::size_t dz = za.cols;
  BoundedGradient out;
  out.sum = zeros_like(params);
  out.k_effective = 1;
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t j = 0; j < B; ++j) {
      // grad of the single similarity s_ij w.r.t. theta
      Matrix dza(B, dz), dzp(B, dz);
      add_cosine_similarity_grad(za.row(i), zp.row(j), 1.0, dza.row(i),
                                 dzp.row(j));
      ParamVector g = zeros_like(params);
      detail::accumulate_vjp(tape_a, params, dza, g);
      detail::accumulate_vjp(tape_p, params, dzp, g);
      if (stats) stats->pair_grad_evals += 1;
      tally_clip(stats, clip_in_place(g, strategy.C));
      const double weight = w.at(i, j);
      for (std::size_t t = 0; t < g.size(); ++t) {
        out.sum.values[t] += weight * g.values[t];
      }
    }
  }
  return out;
}

}  // namespace

ClipKind clip_kind_from_string(const std::string& name) {
  if (name == "sample") return ClipKind::kSampleLevel;
  if (name == "batch") return ClipKind::kBatchLevel;
  if (name == "group_clip") return ClipKind::kGroupClip;
  if (name == "group_neg") return ClipKind::kGroupNeg;
  if (name == "group_neg_aug") return ClipKind::kGroupNegAug;
  if (name == "group_neg_dual") return ClipKind::kGroupNegDual;
  if (name == "logit_dp") return ClipKind::kLogitDP;
  throw std::invalid_argument("unknown strategy: " + name);
}

std::string to_string(ClipKind kind) {
  switch (kind) {
    case ClipKind::kSampleLevel: return "sample";
    case ClipKind::kBatchLevel: return "batch";
    case ClipKind::kGroupClip: return "group_clip";
    case ClipKind::kGroupNeg: return "group_neg";
    case ClipKind::kGroupNegAug: return "group_neg_aug";
    case ClipKind::kGroupNegDual: return "group_neg_dual";
    case ClipKind::kLogitDP: return "logit_dp";
  }
  return "?";
}

ParamVector clip(const ParamVector& v, double C) {
  if (!(C > 0.0)) throw std::invalid_argument("clipping norm must be > 0");
  ParamVector out = v;
  clip_in_place(out, C);
  return out;
}

BoundedGradient bounded_gradient(const ClipStrategy& strategy,
                                 const ParamVector& params,
                                 const EncoderSpec& spec,
                                 const PairBatch& batch,
                                 const GroupAssignment& groups,
                                 const LossConfig& cfg, BoundStats* stats) {
  if (!(strategy.C > 0.0)) {
    throw std::invalid_argument("clipping norm must be > 0");
  }
  BoundedGradient out;
  switch (strategy.kind) {
    case ClipKind::kSampleLevel: {
      auto ps = per_sample_fullbatch_grads(params, spec, batch, cfg.tau);
      if (stats) stats->loss = ps.total_loss();
      out.sum = zeros_like(params);
      for (auto& g : ps.grads) {
        tally_clip(stats, clip_in_place(g, strategy.C));
        add_into(out.sum, g);
      }
      out.k_effective = 1;
      break;
    }
    case ClipKind::kBatchLevel: {
      auto [loss, g] = infonce_full_batch(params, spec, batch, cfg.tau);
      if (stats) stats->loss = loss;
      tally_clip(stats, clip_in_place(g, strategy.C));
      out.sum = std::move(g);
      out.k_effective = 1;
      break;
    }
    case ClipKind::kGroupClip: {
      auto ps = per_sample_fullbatch_grads(params, spec, batch, cfg.tau);
      if (stats) stats->loss = ps.total_loss();
      out.sum = zeros_like(params);
      for (const auto& grp : groups.groups) {
        ParamVector gk = zeros_like(params);
        for (std::size_t idx : grp) add_into(gk, ps.grads[idx]);
        tally_clip(stats, clip_in_place(gk, strategy.C));
        add_into(out.sum, gk);
      }
      out.k_effective = groups.K;
      break;
    }
    case ClipKind::kGroupNeg:
    case ClipKind::kGroupNegAug: {
      GroupLossResult r =
          strategy.kind == ClipKind::kGroupNeg
              ? group_infonce(params, spec, batch, groups, cfg.tau)
              : group_infonce_aug(params, spec, batch, groups, cfg.tau,
                                  cfg.n_aug, cfg.aug);
      if (stats) stats->loss = r.total_loss();
      out.sum = zeros_like(params);
      for (auto& g : r.per_group_grad) {
        tally_clip(stats, clip_in_place(g, strategy.C));
        add_into(out.sum, g);
      }
      out.k_effective = groups.K;
      break;
    }
    case ClipKind::kGroupNegDual:
      throw std::invalid_argument(
          "group_neg_dual needs two encoders; use bounded_gradient_dual");
    case ClipKind::kLogitDP:
      return logitdp_gradient(strategy, params, spec, batch, cfg.tau, stats);
  }
  return out;
}

BoundedGradient bounded_gradient_dual(const ClipStrategy& strategy,
                                      const ParamVector& params1,
                                      const ParamVector& params2,
                                      const EncoderSpec& spec1,
                                      const EncoderSpec& spec2,
                                      const PairBatch& batch,
                                      const GroupAssignment& groups,
                                      const LossConfig& cfg,
                                      BoundStats* stats) {
  if (strategy.kind != ClipKind::kGroupNegDual) {
    throw std::invalid_argument("only group_neg_dual takes two encoders");
  }
  if (!(strategy.C > 0.0)) {
    throw std::invalid_argument("clipping norm must be > 0");
  }
  GroupLossResult r = group_infonce_dual(params1, params2, spec1, spec2, batch,
                                         groups, cfg.tau);
  if (stats) stats->loss = r.total_loss();
  BoundedGradient out;
  out.sum = zeros_like(r.per_group_grad.front());
  for (auto& g : r.per_group_grad) {
    tally_clip(stats, clip_in_place(g, strategy.C));
    add_into(out.sum, g);
  }
  out.k_effective = groups.K;
  return out;
}

NoisySummary noisy_update_with_sensitivity(const ParamVector& sum,
                                           std::size_t divisor,
                                           double sensitivity, double sigma,
                                           std::int64_t seed,
                                           std::int64_t step) {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (divisor < 1) throw std::invalid_argument("divisor must be >= 1");
  NoisySummary out;
  out.clean_sum = sum;
  out.K = divisor;
  out.noise = zeros_like(sum);
  Rng rng(StreamKind::kNoise, static_cast<std::uint64_t>(seed),
          static_cast<std::uint64_t>(step));
  const double scale = sensitivity * sigma;
  for (auto& x : out.noise.values) x = scale * rng.gaussian();
  out.noisy_update = sum;
  const double inv = 1.0 / static_cast<double>(divisor);
  for (std::size_t i = 0; i < sum.size(); ++i) {
    out.noisy_update.values[i] = (sum.values[i] + out.noise.values[i]) * inv;
  }
  const double noise_norm = l2_norm(out.noise.values);
  out.snr = noise_norm == 0.0 ? std::numeric_limits<double>::infinity()
                              : l2_norm(out.clean_sum.values) / noise_norm;
  return out;
}

NoisySummary privatized_step(const ParamVector& sum, std::size_t K, double C,
                             double sigma, std::int64_t seed,
                             std::int64_t step) {
  return noisy_update_with_sensitivity(sum, K, 2.0 * C, sigma, seed, step);
}

double gradient_snr(const NoisySummary& summary) { return summary.snr; }

}  // namespace dpgcl
