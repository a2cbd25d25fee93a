#pragma once

#include <cstdint>
#include <string>

#include "dpgcl/loss.hpp"

namespace dpgcl {

// Every gradient-bounding strategy under comparison. The GroupNeg family is
// the method of interest; the others are the baselines it is measured
// against.
enum class ClipKind {
  kSampleLevel,   // per-sample clipping, full-batch denominators
  kBatchLevel,    // one clip of the aggregated batch gradient
  kGroupClip,     // per-group clipping, full-batch denominators
  kGroupNeg,      // per-group clipping of group-local losses
  kGroupNegAug,   // group-local losses with intra-group augmentation
  kGroupNegDual,  // group-local dual-encoder loss
  kLogitDP,       // pairwise similarity-gradient clipping
};

ClipKind clip_kind_from_string(const std::string& name);
std::string to_string(ClipKind kind);

struct ClipStrategy {
  ClipKind kind = ClipKind::kGroupNegAug;
  double C = 1.0;
};

// Optional instrumentation for a bounded-gradient evaluation.
struct BoundStats {
  double loss = 0.0;                    // pre-noise loss of the step
  std::size_t clip_units = 0;           // clip operations performed
  std::size_t clipped_units = 0;        // those whose norm exceeded C
  std::size_t pair_grad_evals = 0;      // LogitDP similarity-gradient count
};

// v * min(1, C / ||v||_2); the zero vector passes through unchanged.
ParamVector clip(const ParamVector& v, double C);

struct BoundedGradient {
  ParamVector sum;
  std::size_t k_effective = 1;  // the divisor group-style updates use
};

// Gradient sum under the chosen bounding strategy (uni-modal strategies).
// LogitDP is restricted to B <= 64; its cost is quadratic in B.
BoundedGradient bounded_gradient(const ClipStrategy& strategy,
                                 const ParamVector& params,
                                 const EncoderSpec& spec,
                                 const PairBatch& batch,
                                 const GroupAssignment& groups,
                                 const LossConfig& cfg,
                                 BoundStats* stats = nullptr);

// GroupNegDual variant over two encoders; the sum covers the concatenated
// parameter vector.
BoundedGradient bounded_gradient_dual(const ClipStrategy& strategy,
                                      const ParamVector& params1,
                                      const ParamVector& params2,
                                      const EncoderSpec& spec1,
                                      const EncoderSpec& spec2,
                                      const PairBatch& batch,
                                      const GroupAssignment& groups,
                                      const LossConfig& cfg,
                                      BoundStats* stats = nullptr);

struct NoisySummary {
  ParamVector clean_sum;
  ParamVector noise;         // the full additive noise vector (already scaled)
  ParamVector noisy_update;  // (clean_sum + noise) / K
  std::size_t K = 1;
  double snr = 0.0;          // ||clean_sum|| / ||noise||
};

// The group-level update: noise 2C * n with n ~ N(0, sigma^2 I), then divide
// by K. The noise stream is keyed by (seed, step) only.
NoisySummary privatized_step(const ParamVector& sum, std::size_t K, double C,
                             double sigma, std::int64_t seed,
                             std::int64_t step);

// Same mechanism with an explicit sensitivity, used for the baseline
// strategies whose sensitivity is not 2C.
NoisySummary noisy_update_with_sensitivity(const ParamVector& sum,
                                           std::size_t divisor,
                                           double sensitivity, double sigma,
                                           std::int64_t seed,
                                           std::int64_t step);

// ||clean|| / ||noise||; +infinity when the noise vector is exactly zero.
double gradient_snr(const NoisySummary& summary);

}  // namespace dpgcl
