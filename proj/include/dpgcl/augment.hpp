#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dpgcl {

// Vector-space analogs of the usual image/text augmentations:
//   ContiguousMask  - zero a random contiguous window (crop analog)
//   GaussianJitter  - add per-coordinate noise (color-jitter analog)
//   SegmentSwap     - exchange two equal-length segments (sentence-swap analog)
enum class AugmentKind { kContiguousMask, kGaussianJitter, kSegmentSwap, kIdentity };

struct AugmentOp {
  AugmentKind kind = AugmentKind::kContiguousMask;
  double strength = 0.2;  // fraction masked / jitter stddev / fraction swapped
  std::int64_t seed = 0;
};

AugmentKind augment_kind_from_string(const std::string& name);
std::string to_string(AugmentKind kind);

// Output is a pure function of (op, x, step, group, replica). The randomness
// never touches data outside the call, which is what keeps augmented
// negatives group-local.
std::vector<double> apply(const AugmentOp& op, const std::vector<double>& x,
                          std::int64_t step, std::size_t group,
                          std::size_t replica);

}  // namespace dpgcl
