#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpgcl/accountant.hpp"
#include "dpgcl/dataset.hpp"
#include "dpgcl/privatize.hpp"

namespace dpgcl {

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  ClipStrategy strategy;
  LossConfig loss;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::int64_t T = 100;
  double q = 0.01;
  double sigma = 1.0;
  EncoderSpec encoder1;
  EncoderSpec encoder2;  // dual-modal runs only
  std::int64_t master_seed = 0;
  // The trainer refuses to run unless this matches (q, sigma, T) exactly and
  // re-certification confirms the stated epsilon. epsilon = +inf marks a
  // deliberately non-private run (sigma = 0).
  std::optional<PrivacyCertificate> certificate;
};

struct MetricsRow {
  std::int64_t step = 0;
  double loss = 0.0;        // pre-noise loss of the realized batch
  double snr = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;   // l2 norm of the clipped, aggregated gradient
  double noise_norm = 0.0;
};

struct TrainResult {
  ParamVector params1;
  ParamVector params2;  // empty unless dual-modal
  std::vector<MetricsRow> metrics;
};

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
};

// SGD or bias-corrected Adam over the noisy pseudo-gradient.
void optimizer_step(OptimizerState& state, ParamVector& params,
                    const ParamVector& pseudo_grad, const TrainConfig& cfg);

// Full training loop: subsample, group, group losses, clip, noise, update,
// exactly T times. Empty realized batches still take a pure-noise step;
// skipping them would leak that the batch was empty. Deterministic under
// master_seed.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

}  // namespace dpgcl
