#pragma once

#include <vector>

#include "dpgcl/dataset.hpp"
#include "dpgcl/encoder.hpp"

namespace dpgcl {

struct EmbedSet {
  Matrix embeddings;
  std::vector<int> labels;

  std::size_t size() const { return embeddings.rows; }
};

// Embeds one side of a dataset with a trained encoder.
EmbedSet embed_anchors(const Dataset& ds, const ParamVector& params,
                       const EncoderSpec& spec);
EmbedSet embed_positives(const Dataset& ds, const ParamVector& params,
                         const EncoderSpec& spec);

// Majority vote over the k most cosine-similar training embeddings. Vote
// ties break toward the smallest class id; similarity ties toward the
// smallest training index.
double knn_accuracy(const EmbedSet& train, const EmbedSet& test, int k);

// Multinomial logistic regression on frozen embeddings, full-batch gradient
// descent from zero init. Returns test accuracy; optionally records the mean
// training loss per epoch.
double linear_probe(const EmbedSet& train, const EmbedSet& test, int epochs,
                    double lr, std::vector<double>* loss_trace = nullptr);

// Fraction of queries whose ground-truth gallery item (pairing[i]) ranks in
// the top K by cosine similarity.
double retrieval_at_k(const EmbedSet& queries, const EmbedSet& gallery, int K,
                      const std::vector<std::size_t>& pairing);

}  // namespace dpgcl
