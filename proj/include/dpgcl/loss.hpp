#pragma once

#include <utility>
#include <vector>

#include "dpgcl/augment.hpp"
#include "dpgcl/dataset.hpp"
#include "dpgcl/encoder.hpp"
#include "dpgcl/grouping.hpp"

namespace dpgcl {

struct LossConfig {
  double tau = 0.5;
  std::size_t S = 16;
  std::size_t n_aug = 0;
  Modality modality = Modality::kUniModal;
  AugmentOp aug;
};

// Per-group losses and flat parameter gradients, listed in ascending group
// index regardless of how they were computed.
struct GroupLossResult {
  std::vector<double> per_group_loss;
  std::vector<ParamVector> per_group_grad;

  double total_loss() const {
    double s = 0.0;
    for (double l : per_group_loss) s += l;
    return s;
  }
};

// Standard InfoNCE over the whole batch: every positive is a negative for
// every other anchor.
std::pair<double, ParamVector> infonce_full_batch(const ParamVector& params,
                                                  const EncoderSpec& spec,
                                                  const PairBatch& batch,
                                                  double tau);

// Group-local InfoNCE: each anchor contrasts only against positives in its
// own group, so each group's gradient depends on that group alone.
GroupLossResult group_infonce(const ParamVector& params,
                              const EncoderSpec& spec, const PairBatch& batch,
                              const GroupAssignment& groups, double tau);

// Group-local InfoNCE with intra-group sample augmentation: each group's
// denominators gain n_aug augmented replicas of every in-group positive,
// including the anchor's own. Augmentation is keyed by (groups.step, group,
// replica). With n_aug = 0 this is bit-identical to group_infonce.
GroupLossResult group_infonce_aug(const ParamVector& params,
                                  const EncoderSpec& spec,
                                  const PairBatch& batch,
                                  const GroupAssignment& groups, double tau,
                                  std::size_t n_aug, const AugmentOp& aug);

// Symmetric dual-encoder group loss: image-to-text plus text-to-image terms
// over the cross-modal similarity. The gradient covers the concatenated
// (theta1, theta2) vector.
GroupLossResult group_infonce_dual(const ParamVector& params1,
                                   const ParamVector& params2,
                                   const EncoderSpec& spec1,
                                   const EncoderSpec& spec2,
                                   const PairBatch& batch,
                                   const GroupAssignment& groups, double tau);

// Per-sample losses and gradients where each sample keeps the full-batch
// denominator; the building block for sample-level and group-clipping
// strategies. grads[i] depends on sample i's anchor and every positive.
struct PerSampleGrads {
  std::vector<double> losses;
  std::vector<ParamVector> grads;

  double total_loss() const {
    double s = 0.0;
    for (double l : losses) s += l;
    return s;
  }
};

PerSampleGrads per_sample_fullbatch_grads(const ParamVector& params,
                                          const EncoderSpec& spec,
                                          const PairBatch& batch, double tau);

}  // namespace dpgcl
