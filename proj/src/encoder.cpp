#include "dpgcl/encoder.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dpgcl/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace dpgcl {

std::vector<int> EncoderSpec::layer_dims() const {
  std::vector<int> dims;
  dims.reserve(hidden_dims.size() + 2);
  dims.push_back(input_dim);
  for (int h : hidden_dims) dims.push_back(h);
  dims.push_back(output_dim);
  return dims;
}

namespace {

void validate_spec(const EncoderSpec& spec) {
  if (spec.input_dim < 1 || spec.output_dim < 1) {
    throw std::invalid_argument("encoder dims must be >= 1");
  }
  for (int h : spec.hidden_dims) {
    if (h < 1) throw std::invalid_argument("encoder dims must be >= 1");
  }
}

double activate(double z, Activation act) {
  return act == Activation::kTanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative expressed through the post-activation value.
double activate_grad(double a, Activation act) {
  return act == Activation::kTanh ? 1.0 - a * a : (a > 0.0 ? 1.0 : 0.0);
}

}  // namespace

std::size_t param_count(const EncoderSpec& spec) {
  validate_spec(spec);
  const auto dims = spec.layer_dims();
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    total += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
  }
  return total;
}

std::vector<ParamSpan> layout_for(const EncoderSpec& spec) {
  validate_spec(spec);
  const auto dims = spec.layer_dims();
  std::vector<ParamSpan> spans;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t w_len = static_cast<std::size_t>(dims[l]) * dims[l + 1];
    spans.push_back({"w" + std::to_string(l), offset, w_len});
    offset += w_len;
    spans.push_back({"b" + std::to_string(l),
                     offset, static_cast<std::size_t>(dims[l + 1])});
    offset += static_cast<std::size_t>(dims[l + 1]);
  }
  return spans;
}

ParamVector init_params(const EncoderSpec& spec) {
  ParamVector p;
  p.layout = layout_for(spec);
  p.values.assign(param_count(spec), 0.0);
  Rng rng(StreamKind::kInit, static_cast<std::uint64_t>(spec.init_seed));
  const auto dims = spec.layer_dims();
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double stddev = std::sqrt(2.0 / dims[l]);
    const std::size_t w_len = static_cast<std::size_t>(dims[l]) * dims[l + 1];
    for (std::size_t i = 0; i < w_len; ++i) {
      p.values[offset + i] = stddev * rng.gaussian();
    }
    offset += w_len + dims[l + 1];  // biases stay zero
  }
  return p;
}

ParamVector zeros_like(const ParamVector& p) {
  ParamVector z;
  z.layout = p.layout;
  z.values.assign(p.values.size(), 0.0);
  return z;
}

ParamVector concat_params(const ParamVector& a, const ParamVector& b) {
  ParamVector joint;
  joint.values.reserve(a.size() + b.size());
  joint.values.insert(joint.values.end(), a.values.begin(), a.values.end());
  joint.values.insert(joint.values.end(), b.values.begin(), b.values.end());
  for (const auto& s : a.layout) {
    joint.layout.push_back({"m1." + s.name, s.offset, s.length});
  }
  for (const auto& s : b.layout) {
    joint.layout.push_back({"m2." + s.name, s.offset + a.size(), s.length});
  }
  return joint;
}

void split_params(const ParamVector& joint, std::size_t first_len,
                  ParamVector& a, ParamVector& b) {
  if (first_len > joint.size()) {
    throw std::invalid_argument("split point beyond parameter vector");
  }
  a.values.assign(joint.values.begin(), joint.values.begin() + first_len);
  b.values.assign(joint.values.begin() + first_len, joint.values.end());
}

Matrix forward(const ParamVector& params, const EncoderSpec& spec,
               const Matrix& inputs, ForwardTape* tape) {
  validate_spec(spec);
  if (inputs.cols != static_cast<std::size_t>(spec.input_dim)) {
    throw std::invalid_argument("input dimension mismatch");
  }
  if (params.size() != param_count(spec)) {
    throw std::invalid_argument("parameter count mismatch");
  }
  const auto dims = spec.layer_dims();
  const std::size_t L = spec.num_layers();
  const std::size_t B = inputs.rows;

  if (tape) {
    tape->spec = spec;
    tape->activations.clear();
    tape->activations.reserve(L + 1);
    tape->activations.push_back(inputs);
    tape->used = false;
  }

  Matrix a = inputs;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t in_dim = dims[l];
    const std::size_t out_dim = dims[l + 1];
    const double* w = params.values.data() + offset;
    const double* bias = w + in_dim * out_dim;
    Matrix next(B, out_dim);
    for (std::size_t r = 0; r < B; ++r) {
      const double* x = a.data.data() + r * in_dim;
      double* y = next.data.data() + r * out_dim;
      for (std::size_t o = 0; o < out_dim; ++o) {
        double z = bias[o];
        const double* wrow = w + o * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) z += wrow[i] * x[i];
        y[o] = (l + 1 == L) ? z : activate(z, spec.activation);
      }
    }
    a = std::move(next);
    if (tape) tape->activations.push_back(a);
    offset += in_dim * out_dim + out_dim;
  }
  return a;
}

namespace detail {

void accumulate_vjp(const ForwardTape& tape, const ParamVector& params,
                    const Matrix& upstream, ParamVector& grad) {
  const EncoderSpec& spec = tape.spec;
  const auto dims = spec.layer_dims();
  const std::size_t L = spec.num_layers();
  if (grad.values.size() != params.size()) {
    grad.values.assign(params.size(), 0.0);
    grad.layout = params.layout;
  }
  if (upstream.rows != tape.activations[0].rows ||
      upstream.cols != static_cast<std::size_t>(spec.output_dim)) {
    throw std::invalid_argument("upstream shape mismatch");
  }

  // Per-layer parameter offsets.
  std::vector<std::size_t> offsets(L);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < L; ++l) {
    offsets[l] = offset;
    offset += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
  }

  const std::size_t B = upstream.rows;
  Matrix delta = upstream;
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t in_dim = dims[l];
    const std::size_t out_dim = dims[l + 1];
    const Matrix& a_in = tape.activations[l];
    double* gw = grad.values.data() + offsets[l];
    double* gb = gw + in_dim * out_dim;
    for (std::size_t r = 0; r < B; ++r) {
      const double* d = delta.data.data() + r * out_dim;
      const double* x = a_in.data.data() + r * in_dim;
      for (std::size_t o = 0; o < out_dim; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        double* gwrow = gw + o * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) gwrow[i] += dv * x[i];
        gb[o] += dv;
      }
    }
    if (l == 0) break;
    const double* w = params.values.data() + offsets[l];
    Matrix prev(B, in_dim);
    for (std::size_t r = 0; r < B; ++r) {
      const double* d = delta.data.data() + r * out_dim;
      const double* a = a_in.data.data() + r * in_dim;
      double* p = prev.data.data() + r * in_dim;
      for (std::size_t o = 0; o < out_dim; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        const double* wrow = w + o * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) p[i] += dv * wrow[i];
      }
      for (std::size_t i = 0; i < in_dim; ++i) {
        p[i] *= activate_grad(a[i], spec.activation);
      }
    }
    delta = std::move(prev);
  }
}

}  // namespace detail

ParamVector backward(ForwardTape& tape, const ParamVector& params,
                     const Matrix& upstream) {
  if (tape.used) throw std::logic_error("forward tape already consumed");
  tape.used = true;
  ParamVector grad = zeros_like(params);
  detail::accumulate_vjp(tape, params, upstream, grad);
  return grad;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity dimension mismatch");
  }
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na < kZeroNormGuard || nb < kZeroNormGuard) return 0.0;
  return dot(a, b) / (na * nb);
}

void add_cosine_similarity_grad(std::span<const double> a,
                                std::span<const double> b, double g,
                                std::span<double> grad_a,
                                std::span<double> grad_b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na < kZeroNormGuard || nb < kZeroNormGuard) return;
  const double inv = 1.0 / (na * nb);
  const double s = dot(a, b) * inv;
  for (std::size_t i = 0; i < a.size(); ++i) {
    grad_a[i] += g * (b[i] * inv - s * a[i] / (na * na));
    grad_b[i] += g * (a[i] * inv - s * b[i] / (nb * nb));
  }
}

void save_params(const ParamVector& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "dpgcl-params v1\n";
  out << "spans " << params.layout.size() << '\n';
  for (const auto& s : params.layout) {
    out << s.name << ' ' << s.offset << ' ' << s.length << '\n';
  }
  out << "values " << params.values.size() << '\n';
  out.write(reinterpret_cast<const char*>(params.values.data()),
            static_cast<std::streamsize>(params.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

ParamVector load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "dpgcl-params" || version != "v1") {
    throw std::runtime_error("bad checkpoint header: " + path);
  }
  std::string tok;
  std::size_t n_spans = 0;
  in >> tok >> n_spans;
  if (tok != "spans") throw std::runtime_error("bad checkpoint layout");
  ParamVector p;
  p.layout.resize(n_spans);
  for (auto& s : p.layout) {
    if (!(in >> s.name >> s.offset >> s.length)) {
      throw std::runtime_error("bad checkpoint span");
    }
  }
  std::size_t total = 0;
  in >> tok >> total;
  if (tok != "values") throw std::runtime_error("bad checkpoint values header");
  in.get();  // consume the newline before the binary blob
  p.values.resize(total);
  in.read(reinterpret_cast<char*>(p.values.data()),
          static_cast<std::streamsize>(total * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(total * sizeof(double))) {
    throw std::runtime_error("truncated checkpoint: " + path);
  }
  return p;
}

}  // namespace dpgcl
