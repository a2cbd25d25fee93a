#include "dpgcl/loss.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dpgcl/parallel.hpp"

namespace dpgcl {

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be > 0");
}

void check_modality(const PairBatch& batch, Modality expected) {
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  if (batch.pairs.front().modality != expected) {
    throw std::invalid_argument("batch modality does not match the loss");
  }
}

Matrix gather_rows(const PairBatch& batch,
                   const std::vector<std::size_t>& indices, bool anchors) {
  const auto& first =
      anchors ? batch.pairs.front().anchor : batch.pairs.front().positive;
  Matrix m(indices.size(), first.features.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const Sample& s = anchors ? batch.pairs[indices[r]].anchor
                              : batch.pairs[indices[r]].positive;
    if (s.features.size() != m.cols) {
      throw std::invalid_argument("inconsistent feature dimensions in batch");
    }
    std::copy(s.features.begin(), s.features.end(), m.row(r).begin());
  }
  return m;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

// One group-local InfoNCE term, the building block shared by the
// full-batch, group, and augmented-group losses). `group_index` keys the
// augmentation stream.
struct GroupTerm {
  double loss = 0.0;
  ParamVector grad;
};

GroupTerm uni_group_term(const ParamVector& params, const EncoderSpec& spec,
                         const PairBatch& batch,
                         const std::vector<std::size_t>& indices, double tau,
                         std::size_t n_aug, const AugmentOp& aug,
                         std::int64_t step, std::size_t group_index) {
  const std::size_t n = indices.size();
  const Matrix xa = gather_rows(batch, indices, true);
  const Matrix xp = gather_rows(batch, indices, false);

  ForwardTape tape_a, tape_p;
  const Matrix za = forward(params, spec, xa, &tape_a);
  const Matrix zp = forward(params, spec, xp, &tape_p);

  std::vector<ForwardTape> tapes_aug(n_aug);
  std::vector<Matrix> z_aug;
  z_aug.reserve(n_aug);
  for (std::size_t m = 0; m < n_aug; ++m) {
    Matrix xm(n, xp.cols);
    for (std::size_t r = 0; r < n; ++r) {
      const auto aug_row = apply(aug, batch.pairs[indices[r]].positive.features,
                                 step, group_index, m + 1);
      std::copy(aug_row.begin(), aug_row.end(), xm.row(r).begin());
    }
    z_aug.push_back(forward(params, spec, xm, &tapes_aug[m]));
  }

  Matrix s(n, n);
  std::vector<Matrix> s_aug(n_aug, Matrix(n, n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      s.at(i, j) = cosine_similarity(za.row(i), zp.row(j));
      for (std::size_t m = 0; m < n_aug; ++m) {
        s_aug[m].at(i, j) = cosine_similarity(za.row(i), z_aug[m].row(j));
      }
    }
  }

  // Max-shifted softmax per anchor; mandatory at tau = 1/100.
  GroupTerm out;
  Matrix ds(n, n);
  std::vector<Matrix> ds_aug(n_aug, Matrix(n, n));
  for (std::size_t i = 0; i < n; ++i) {
    double mx = s.at(i, 0) / tau;
    for (std::size_t j = 0; j < n; ++j) {
      mx = std::max(mx, s.at(i, j) / tau);
      for (std::size_t m = 0; m < n_aug; ++m) {
        mx = std::max(mx, s_aug[m].at(i, j) / tau);
      }
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      denom += std::exp(s.at(i, j) / tau - mx);
      for (std::size_t m = 0; m < n_aug; ++m) {
        denom += std::exp(s_aug[m].at(i, j) / tau - mx);
      }
    }
    out.loss += -s.at(i, i) / tau + (mx + std::log(denom));
    for (std::size_t j = 0; j < n; ++j) {
      ds.at(i, j) = std::exp(s.at(i, j) / tau - mx) / denom / tau;
      for (std::size_t m = 0; m < n_aug; ++m) {
        ds_aug[m].at(i, j) = std::exp(s_aug[m].at(i, j) / tau - mx) / denom / tau;
      }
    }
    ds.at(i, i) -= 1.0 / tau;
  }

  const std::size_t dz = za.cols;
  Matrix dza(n, dz), dzp(n, dz);
  std::vector<Matrix> dz_aug(n_aug, Matrix(n, dz));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      add_cosine_similarity_grad(za.row(i), zp.row(j), ds.at(i, j), dza.row(i),
                                 dzp.row(j));
      for (std::size_t m = 0; m < n_aug; ++m) {
        add_cosine_similarity_grad(za.row(i), z_aug[m].row(j),
                                   ds_aug[m].at(i, j), dza.row(i),
                                   dz_aug[m].row(j));
      }
    }
  }

  out.grad = zeros_like(params);
  detail::accumulate_vjp(tape_a, params, dza, out.grad);
  detail::accumulate_vjp(tape_p, params, dzp, out.grad);
  for (std::size_t m = 0; m < n_aug; ++m) {
    detail::accumulate_vjp(tapes_aug[m], params, dz_aug[m], out.grad);
  }
  return out;
}

GroupTerm dual_group_term(const ParamVector& params1,
                          const ParamVector& params2, const EncoderSpec& spec1,
                          const EncoderSpec& spec2, const PairBatch& batch,
                          const std::vector<std::size_t>& indices, double tau) {
  const std::size_t n = indices.size();
  const Matrix xa = gather_rows(batch, indices, true);
  const Matrix xp = gather_rows(batch, indices, false);

  ForwardTape tape_a, tape_p;
  const Matrix za = forward(params1, spec1, xa, &tape_a);
  const Matrix zp = forward(params2, spec2, xp, &tape_p);

  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      s.at(i, j) = cosine_similarity(za.row(i), zp.row(j));
    }
  }

  GroupTerm out;
  Matrix ds(n, n);
  // Row direction: each anchor against the group's positives.
  for (std::size_t i = 0; i < n; ++i) {
    double mx = s.at(i, 0) / tau;
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, s.at(i, j) / tau);
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) denom += std::exp(s.at(i, j) / tau - mx);
    out.loss += -s.at(i, i) / tau + (mx + std::log(denom));
    for (std::size_t j = 0; j < n; ++j) {
      ds.at(i, j) += std::exp(s.at(i, j) / tau - mx) / denom / tau;
    }
    ds.at(i, i) -= 1.0 / tau;
  }
  // Column direction: each positive against the group's anchors.
  for (std::size_t j = 0; j < n; ++j) {
    double mx = s.at(0, j) / tau;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, s.at(i, j) / tau);
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) denom += std::exp(s.at(i, j) / tau - mx);
    out.loss += -s.at(j, j) / tau + (mx + std::log(denom));
    for (std::size_t i = 0; i < n; ++i) {
      ds.at(i, j) += std::exp(s.at(i, j) / tau - mx) / denom / tau;
    }
    ds.at(j, j) -= 1.0 / tau;
  }

  const std::size_t dz = za.cols;
  Matrix dza(n, dz), dzp(n, dz);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      add_cosine_similarity_grad(za.row(i), zp.row(j), ds.at(i, j), dza.row(i),
                                 dzp.row(j));
    }
  }

  ParamVector g1 = zeros_like(params1);
  ParamVector g2 = zeros_like(params2);
  detail::accumulate_vjp(tape_a, params1, dza, g1);
  detail::accumulate_vjp(tape_p, params2, dzp, g2);
  out.grad = concat_params(g1, g2);
  return out;
}

GroupLossResult run_groups(
    const GroupAssignment& groups,
    const std::function<GroupTerm(const std::vector<std::size_t>&, std::size_t)>&
        term_fn) {
  GroupLossResult result;
  result.per_group_loss.resize(groups.K);
  result.per_group_grad.resize(groups.K);
  parallel_for(groups.K, [&](std::size_t k) {
    GroupTerm t = term_fn(groups.groups[k], k);
    result.per_group_loss[k] = t.loss;
    result.per_group_grad[k] = std::move(t.grad);
  });
  return result;
}

}  // namespace

std::pair<double, ParamVector> infonce_full_batch(const ParamVector& params,
                                                  const EncoderSpec& spec,
                                                  const PairBatch& batch,
                                                  double tau) {
  check_tau(tau);
  check_modality(batch, Modality::kUniModal);
  GroupTerm t = uni_group_term(params, spec, batch, all_indices(batch.size()),
                               tau, 0, AugmentOp{}, 0, 0);
  return {t.loss, std::move(t.grad)};
}

GroupLossResult group_infonce(const ParamVector& params,
                              const EncoderSpec& spec, const PairBatch& batch,
                              const GroupAssignment& groups, double tau) {
  check_tau(tau);
  check_modality(batch, Modality::kUniModal);
  return run_groups(groups, [&](const std::vector<std::size_t>& idx,
                                std::size_t k) {
    return uni_group_term(params, spec, batch, idx, tau, 0, AugmentOp{}, 0, k);
  });
}

GroupLossResult group_infonce_aug(const ParamVector& params,
                                  const EncoderSpec& spec,
                                  const PairBatch& batch,
                                  const GroupAssignment& groups, double tau,
                                  std::size_t n_aug, const AugmentOp& aug) {
  check_tau(tau);
  check_modality(batch, Modality::kUniModal);
  return run_groups(groups, [&](const std::vector<std::size_t>& idx,
                                std::size_t k) {
    return uni_group_term(params, spec, batch, idx, tau, n_aug, aug,
                          groups.step, k);
  });
}

GroupLossResult group_infonce_dual(const ParamVector& params1,
                                   const ParamVector& params2,
                                   const EncoderSpec& spec1,
                                   const EncoderSpec& spec2,
                                   const PairBatch& batch,
                                   const GroupAssignment& groups, double tau) {
  check_tau(tau);
  check_modality(batch, Modality::kDualModal);
  return run_groups(groups,
                    [&](const std::vector<std::size_t>& idx, std::size_t) {
                      return dual_group_term(params1, params2, spec1, spec2,
                                             batch, idx, tau);
                    });
}

PerSampleGrads per_sample_fullbatch_grads(const ParamVector& params,
                                          const EncoderSpec& spec,
                                          const PairBatch& batch, double tau) {
  check_tau(tau);
  check_modality(batch, Modality::kUniModal);
  const std::size_t B = batch.size();
  const auto idx = all_indices(B);
  const Matrix xa = gather_rows(batch, idx, true);
  const Matrix xp = gather_rows(batch, idx, false);

  ForwardTape tape_a, tape_p;
  const Matrix za = forward(params, spec, xa, &tape_a);
  const Matrix zp = forward(params, spec, xp, &tape_p);

  Matrix s(B, B);
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t j = 0; j < B; ++j) {
      s.at(i, j) = cosine_similarity(za.row(i), zp.row(j));
    }
  }

  PerSampleGrads out;
  out.losses.resize(B);
  out.grads.resize(B);
  const std::size_t dz = za.cols;
  parallel_for(B, [&](std::size_t i) {
    double mx = s.at(i, 0) / tau;
    for (std::size_t j = 0; j < B; ++j) mx = std::max(mx, s.at(i, j) / tau);
    double denom = 0.0;
    for (std::size_t j = 0; j < B; ++j) denom += std::exp(s.at(i, j) / tau - mx);
    out.losses[i] = -s.at(i, i) / tau + (mx + std::log(denom));

    Matrix dza(B, dz), dzp(B, dz);
    for (std::size_t j = 0; j < B; ++j) {
      double w = std::exp(s.at(i, j) / tau - mx) / denom / tau;
      if (j == i) w -= 1.0 / tau;
      add_cosine_similarity_grad(za.row(i), zp.row(j), w, dza.row(i),
                                 dzp.row(j));
    }
    ParamVector g = zeros_like(params);
    detail::accumulate_vjp(tape_a, params, dza, g);
    detail::accumulate_vjp(tape_p, params, dzp, g);
    out.grads[i] = std::move(g);
  });
  return out;
}

}  // namespace dpgcl
