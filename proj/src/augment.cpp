#include "dpgcl/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpgcl/rng.hpp"

namespace dpgcl {

AugmentKind augment_kind_from_string(const std::string& name) {
  if (name == "mask") return AugmentKind::kContiguousMask;
  if (name == "jitter") return AugmentKind::kGaussianJitter;
  if (name == "segment_swap") return AugmentKind::kSegmentSwap;
  if (name == "identity") return AugmentKind::kIdentity;
  throw std::invalid_argument("unknown augmentation kind: " + name);
}

std::string to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::kContiguousMask: return "mask";
    case AugmentKind::kGaussianJitter: return "jitter";
    case AugmentKind::kSegmentSwap: return "segment_swap";
    case AugmentKind::kIdentity: return "identity";
  }
  return "?";
}

std::vector<double> apply(const AugmentOp& op, const std::vector<double>& x,
                          std::int64_t step, std::size_t group,
                          std::size_t replica) {
  if (op.kind == AugmentKind::kGaussianJitter) {
    if (op.strength < 0.0) throw std::invalid_argument("jitter strength < 0");
  } else if (op.kind != AugmentKind::kIdentity) {
    if (op.strength < 0.0 || op.strength > 1.0) {
      throw std::invalid_argument("augment strength must be in [0, 1]");
    }
  }
  if (op.kind == AugmentKind::kIdentity) return x;

  const std::size_t d = x.size();
  Rng rng(StreamKind::kAugment, static_cast<std::uint64_t>(op.seed),
          static_cast<std::uint64_t>(step), group, replica);
  std::vector<double> out = x;

  switch (op.kind) {
    case AugmentKind::kContiguousMask: {
      const std::size_t len =
          std::min<std::size_t>(d, static_cast<std::size_t>(
                                       std::ceil(op.strength * static_cast<double>(d))));
      if (len == 0) return out;
      const std::size_t start = rng.below(d - len + 1);
      std::fill(out.begin() + start, out.begin() + start + len, 0.0);
      break;
    }
    case AugmentKind::kGaussianJitter: {
      for (auto& v : out) v += op.strength * rng.gaussian();
      break;
    }
    case AugmentKind::kSegmentSwap: {
      if (d < 2) return out;
      std::size_t len = static_cast<std::size_t>(
          std::ceil(op.strength * static_cast<double>(d)));
      len = std::clamp<std::size_t>(len, 1, d / 2);
      // Two disjoint windows: the first starts anywhere that leaves room for
      // the second strictly after it.
      const std::size_t s1 = rng.below(d - 2 * len + 1);
      const std::size_t s2 = s1 + len + rng.below(d - len - (s1 + len) + 1);
      for (std::size_t i = 0; i < len; ++i) std::swap(out[s1 + i], out[s2 + i]);
      break;
    }
    case AugmentKind::kIdentity:
      break;
  }
  return out;
}

}  // namespace dpgcl
