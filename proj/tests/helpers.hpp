#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "dpgcl/dataset.hpp"
#include "dpgcl/encoder.hpp"
#include "dpgcl/rng.hpp"

namespace dpgcl::testing {

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / scale;
}

// Central finite difference of a scalar loss over one parameter coordinate.
inline double finite_difference(
    const std::function<double(const ParamVector&)>& loss, ParamVector params,
    std::size_t coord, double h = 1e-5) {
  const double saved = params.values[coord];
  params.values[coord] = saved + h;
  const double up = loss(params);
  params.values[coord] = saved - h;
  const double down = loss(params);
  params.values[coord] = saved;
  return (up - down) / (2.0 * h);
}

// Checks `n_coords` random coordinates of an analytic gradient against
// central finite differences. Returns the worst relative error.
inline double max_fd_error(const std::function<double(const ParamVector&)>& loss,
                           const ParamVector& params, const ParamVector& grad,
                           std::size_t n_coords, std::uint64_t seed) {
  Rng rng(StreamKind::kTrial, seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < n_coords; ++i) {
    const std::size_t c = rng.below(params.size());
    const double fd = finite_difference(loss, params, c);
    worst = std::max(worst, rel_err(grad.values[c], fd));
  }
  return worst;
}

// Small random uni-modal batch with gaussian features.
inline PairBatch random_batch(std::size_t B, int d, std::uint64_t seed) {
  Rng rng(StreamKind::kTrial, seed);
  PairBatch batch;
  for (std::size_t i = 0; i < B; ++i) {
    PairSample p;
    p.modality = Modality::kUniModal;
    p.anchor.features.resize(d);
    p.positive.features.resize(d);
    for (auto& x : p.anchor.features) x = rng.gaussian();
    for (auto& x : p.positive.features) x = rng.gaussian();
    batch.pairs.push_back(std::move(p));
    batch.source_indices.push_back(i);
  }
  return batch;
}

inline PairBatch random_dual_batch(std::size_t B, int d1, int d2,
                                   std::uint64_t seed) {
  Rng rng(StreamKind::kTrial, seed);
  PairBatch batch;
  for (std::size_t i = 0; i < B; ++i) {
    PairSample p;
    p.modality = Modality::kDualModal;
    p.anchor.features.resize(d1);
    p.positive.features.resize(d2);
    for (auto& x : p.anchor.features) x = rng.gaussian();
    for (auto& x : p.positive.features) x = rng.gaussian();
    batch.pairs.push_back(std::move(p));
    batch.source_indices.push_back(i);
  }
  return batch;
}

inline EncoderSpec small_spec(int input_dim, int output_dim,
                              std::int64_t seed,
                              std::vector<int> hidden = {8}) {
  EncoderSpec spec;
  spec.input_dim = input_dim;
  spec.hidden_dims = std::move(hidden);
  spec.output_dim = output_dim;
  spec.activation = Activation::kTanh;
  spec.init_seed = seed;
  return spec;
}

}  // namespace dpgcl::testing
