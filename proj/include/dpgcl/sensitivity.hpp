#pragma once

#include <cstdint>
#include <vector>

#include "dpgcl/privatize.hpp"

namespace dpgcl {

// Worst-case l2 change of the bounded gradient across neighboring batches:
//   sample        (2B+1) C
//   batch          2C
//   group_clip    (2K+1) C
//   group_neg*     2C
//   logit_dp       2 (1 + (B-2) e^2 / (e^2 + B - 1)) C
double theoretical_bound(ClipKind kind, std::size_t B, std::size_t K,
                         double C);

// One neighboring-batch experiment: batch D of size B, neighbor
// D' = D + one pair, grouping coupled so shared indices keep their groups,
// identical parameters on both sides.
struct SensitivityTrial {
  ClipStrategy strategy;
  std::size_t B = 0;
  std::size_t S = 0;
  std::size_t K = 0;  // group count on the base batch
  std::uint64_t encoder_seed = 0;
  std::uint64_t data_seed = 0;
  bool adversarial = false;
  double measured = 0.0;
  double bound = 0.0;
};

// Adversarial trials shrink the final-layer weights so embedding norms are
// tiny; cosine gradients scale inversely with embedding norm, which reliably
// saturates clipping. LogitDP trials always run at tau = 1, the regime the
// pairwise-clipping bound is stated for.
SensitivityTrial run_trial(const ClipStrategy& strategy, std::size_t B,
                           std::size_t S, std::uint64_t encoder_seed,
                           std::uint64_t data_seed, bool adversarial,
                           double tau, std::size_t n_aug);

struct SweepCell {
  ClipKind strategy;
  std::size_t B = 0;
  std::size_t S = 0;
  double C = 0.0;
  std::size_t K = 0;
  double max_measured = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
};

struct SweepReport {
  std::vector<SweepCell> cells;
};

inline constexpr double kSensitivityTolerance = 1e-9;

// Runs trials_per_cell trials (a mix of random and adversarial encoders) for
// every (strategy, B, S, C) cell. Throws SensitivityViolation naming the
// trial seeds if any measurement exceeds its bound by more than the
// tolerance.
SweepReport sweep(const std::vector<ClipKind>& strategies,
                  const std::vector<std::size_t>& batch_sizes,
                  const std::vector<std::size_t>& group_sizes,
                  const std::vector<double>& clip_norms,
                  std::size_t trials_per_cell, std::uint64_t seed, double tau,
                  std::size_t n_aug);

}  // namespace dpgcl
