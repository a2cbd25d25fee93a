#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dpgcl {

enum class Modality { kUniModal, kDualModal };

struct Sample {
  std::vector<double> features;
  int label = 0;
};

struct PairSample {
  Sample anchor;
  Sample positive;  // same dim as anchor for uni-modal; may differ for dual
  Modality modality = Modality::kUniModal;
};

struct Dataset {
  std::vector<PairSample> pairs;
  std::int64_t seed = 0;
  int num_classes = 0;
  double class_separation = 0.0;
  Modality modality = Modality::kUniModal;
  int d_x = 0;   // anchor feature dimension
  int d_x2 = 0;  // positive feature dimension (== d_x for uni-modal)

  std::size_t n() const { return pairs.size(); }
};

// A realized minibatch. Indices refer back into the source dataset and are
// distinct and ascending.
struct PairBatch {
  std::vector<PairSample> pairs;
  std::vector<std::size_t> source_indices;

  std::size_t size() const { return pairs.size(); }
};

// Seeded Gaussian-mixture pairs: each class gets a random unit-norm mean
// scaled by `separation`; anchor and positive are independent draws from the
// same class component, so the "augmented view" shares the class signal but
// nothing else.
Dataset generate_unimodal(int num_classes, int per_class, int d_x,
                          double separation, double noise_std,
                          std::int64_t seed);

// Two independent means per class, one per modality; anchors live in the
// first modality, positives in the second.
Dataset generate_dualmodal(int num_classes, int per_class, int d1, int d2,
                           double separation, double noise_std,
                           std::int64_t seed);

// Each pair enters the batch independently with probability q. The stream is
// a pure function of (seed, step) so any step is reproducible in isolation.
PairBatch poisson_subsample(const Dataset& ds, double q, std::int64_t seed,
                            std::int64_t step);

// Per-class prefix split: the first train_per_class pairs of every class go
// to the first dataset, the rest to the second. Both halves share the class
// means of the original generation, which is what held-out evaluation needs.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds,
                                          int train_per_class);

// Line-oriented text format: header `n d_x d_x2 num_classes modality`, then
// one `label anchor... positive...` record per pair. Round-trips exactly.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace dpgcl
