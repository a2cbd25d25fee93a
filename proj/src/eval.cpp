#include "dpgcl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace dpgcl {

namespace {

EmbedSet embed_side(const Dataset& ds, const ParamVector& params,
                    const EncoderSpec& spec, bool anchors) {
  if (ds.n() == 0) throw std::invalid_argument("empty dataset");
  const int dim = anchors ? ds.d_x : ds.d_x2;
  Matrix inputs(ds.n(), dim);
  EmbedSet out;
  out.labels.reserve(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const Sample& s = anchors ? ds.pairs[i].anchor : ds.pairs[i].positive;
    std::copy(s.features.begin(), s.features.end(), inputs.row(i).begin());
    out.labels.push_back(s.label);
  }
  out.embeddings = forward(params, spec, inputs);
  return out;
}

}  // namespace

EmbedSet embed_anchors(const Dataset& ds, const ParamVector& params,
                       const EncoderSpec& spec) {
  return embed_side(ds, params, spec, true);
}

EmbedSet embed_positives(const Dataset& ds, const ParamVector& params,
                         const EncoderSpec& spec) {
  return embed_side(ds, params, spec, false);
}

double knn_accuracy(const EmbedSet& train, const EmbedSet& test, int k) {
  if (train.size() == 0 || test.size() == 0) {
    throw std::invalid_argument("empty embedding set");
  }
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
    throw std::invalid_argument("k must be in [1, train size]");
  }

  std::size_t correct = 0;
  std::vector<std::pair<double, std::size_t>> sims(train.size());
  for (std::size_t t = 0; t < test.size(); ++t) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      sims[i] = {cosine_similarity(test.embeddings.row(t),
                                   train.embeddings.row(i)),
                 i};
    }
    std::partial_sort(sims.begin(), sims.begin() + k, sims.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    std::map<int, int> votes;
    for (int j = 0; j < k; ++j) votes[train.labels[sims[j].second]] += 1;
    int best_label = votes.begin()->first;
    int best_count = votes.begin()->second;
    for (const auto& [label, count] : votes) {
      if (count > best_count) {  // ties keep the smaller class id
        best_label = label;
        best_count = count;
      }
    }
    if (best_label == test.labels[t]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double linear_probe(const EmbedSet& train, const EmbedSet& test, int epochs,
                    double lr, std::vector<double>* loss_trace) {
  if (train.size() == 0 || test.size() == 0) {
    throw std::invalid_argument("empty embedding set");
  }
  int num_classes = 0;
  for (int l : train.labels) num_classes = std::max(num_classes, l + 1);
  if (num_classes < 2) {
    throw std::invalid_argument("linear probe needs at least 2 classes");
  }
  const std::size_t d = train.embeddings.cols;
  const std::size_t n = train.size();
  // Weights row-major (class x dim) plus a bias per class, zero init.
  Matrix w(num_classes, d);
  std::vector<double> bias(num_classes, 0.0);
  std::vector<double> logits(num_classes);
  Matrix gw(num_classes, d);
  std::vector<double> gb(num_classes);

  if (loss_trace) loss_trace->clear();
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::fill(gw.data.begin(), gw.data.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    double epoch_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = train.embeddings.row(i);
      double mx = -1e300;
      for (int c = 0; c < num_classes; ++c) {
        logits[c] = dot(w.row(c), x) + bias[c];
        mx = std::max(mx, logits[c]);
      }
      double denom = 0.0;
      for (int c = 0; c < num_classes; ++c) denom += std::exp(logits[c] - mx);
      epoch_loss += -(logits[train.labels[i]] - mx) + std::log(denom);
      for (int c = 0; c < num_classes; ++c) {
        const double p = std::exp(logits[c] - mx) / denom;
        const double g = p - (c == train.labels[i] ? 1.0 : 0.0);
        for (std::size_t j = 0; j < d; ++j) gw.at(c, j) += g * x[j];
        gb[c] += g;
      }
    }
    if (loss_trace) loss_trace->push_back(epoch_loss / static_cast<double>(n));
    const double scale = lr / static_cast<double>(n);
    for (int c = 0; c < num_classes; ++c) {
      for (std::size_t j = 0; j < d; ++j) w.at(c, j) -= scale * gw.at(c, j);
      bias[c] -= scale * gb[c];
    }
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto x = test.embeddings.row(i);
    int arg = 0;
    double best = -1e300;
    for (int c = 0; c < num_classes; ++c) {
      const double logit = dot(w.row(c), x) + bias[c];
      if (logit > best) {
        best = logit;
        arg = c;
      }
    }
    if (arg == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double retrieval_at_k(const EmbedSet& queries, const EmbedSet& gallery, int K,
                      const std::vector<std::size_t>& pairing) {
  if (queries.size() == 0 || gallery.size() == 0) {
    throw std::invalid_argument("empty embedding set");
  }
  if (K < 1 || static_cast<std::size_t>(K) > gallery.size()) {
    throw std::invalid_argument("K must be in [1, gallery size]");
  }
  if (pairing.size() != queries.size()) {
    throw std::invalid_argument("pairing must map every query");
  }

  std::size_t hits = 0;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const std::size_t truth = pairing[qi];
    if (truth >= gallery.size()) {
      throw std::invalid_argument("pairing index out of range");
    }
    const double s_true = cosine_similarity(queries.embeddings.row(qi),
                                            gallery.embeddings.row(truth));
    // Rank = number of gallery items ahead of the true match under
    // (similarity desc, index asc) ordering.
    std::size_t rank = 0;
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (g == truth) continue;
      const double s = cosine_similarity(queries.embeddings.row(qi),
                                         gallery.embeddings.row(g));
      if (s > s_true || (s == s_true && g < truth)) ++rank;
    }
    if (rank < static_cast<std::size_t>(K)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

}  // namespace dpgcl
