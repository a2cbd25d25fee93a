#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpgcl/matrix.hpp"

namespace dpgcl {

enum class Activation { kTanh, kRelu };

// MLP shape. The final layer is always linear so embeddings are unconstrained
// before cosine normalization.
struct EncoderSpec {
  int input_dim = 0;
  std::vector<int> hidden_dims;
  int output_dim = 0;
  Activation activation = Activation::kTanh;
  std::int64_t init_seed = 0;

  // [input, hidden..., output]
  std::vector<int> layer_dims() const;
  std::size_t num_layers() const { return hidden_dims.size() + 1; }
};

struct ParamSpan {
  std::string name;  // "w<l>" or "b<l>", prefixed for concatenated models
  std::size_t offset = 0;
  std::size_t length = 0;
};

// Flat vector of all trainable parameters plus the span layout that maps it
// back onto (layer, matrix/bias) blocks.
struct ParamVector {
  std::vector<double> values;
  std::vector<ParamSpan> layout;

  std::size_t size() const { return values.size(); }
};

std::size_t param_count(const EncoderSpec& spec);
std::vector<ParamSpan> layout_for(const EncoderSpec& spec);

// He-style init: weights ~ N(0, 2/fan_in), biases zero, deterministic under
// init_seed.
ParamVector init_params(const EncoderSpec& spec);

ParamVector zeros_like(const ParamVector& p);

// Concatenation for dual-encoder training, where clipping and noise treat
// both parameter vectors as one. Span names gain "m1."/"m2." prefixes.
ParamVector concat_params(const ParamVector& a, const ParamVector& b);
void split_params(const ParamVector& joint, std::size_t first_len,
                  ParamVector& a, ParamVector& b);

// Cached per-layer activations for one forward pass.
struct ForwardTape {
  EncoderSpec spec;
  std::vector<Matrix> activations;  // activations[0] is the input batch
  bool used = false;
};

// Row i of the result is the embedding of input row i.
Matrix forward(const ParamVector& params, const EncoderSpec& spec,
               const Matrix& inputs, ForwardTape* tape = nullptr);

// Returns sum_i (d embedding_i / d theta)^T * upstream_i as a flat gradient.
// A tape may be consumed exactly once.
ParamVector backward(ForwardTape& tape, const ParamVector& params,
                     const Matrix& upstream);

namespace detail {
// Non-consuming vector-Jacobian product used by the loss kernels, which apply
// several upstreams against one forward pass. Accumulates into `grad`.
void accumulate_vjp(const ForwardTape& tape, const ParamVector& params,
                    const Matrix& upstream, ParamVector& grad);
}  // namespace detail

// Cosine similarity with a zero-norm guard: below 1e-12 the similarity is 0
// and its gradient vanishes.
inline constexpr double kZeroNormGuard = 1e-12;

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Accumulates g * ds/da into grad_a and g * ds/db into grad_b, differentiating
// the full normalized expression.
void add_cosine_similarity_grad(std::span<const double> a,
                                std::span<const double> b, double g,
                                std::span<double> grad_a,
                                std::span<double> grad_b);

// Checkpoint: text layout descriptor followed by the raw little-endian f64
// array. Round-trips exactly.
void save_params(const ParamVector& params, const std::string& path);
ParamVector load_params(const std::string& path);

}  // namespace dpgcl
