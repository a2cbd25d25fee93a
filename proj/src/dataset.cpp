#include "dpgcl/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dpgcl/matrix.hpp"
#include "dpgcl/rng.hpp"

namespace dpgcl {

namespace {

std::vector<double> unit_direction(int dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm = 0.0;
  // A zero draw is astronomically unlikely but would divide by zero.
  do {
    for (auto& x : v) x = rng.gaussian();
    norm = l2_norm(v);
  } while (norm < 1e-12);
  for (auto& x : v) x /= norm;
  return v;
}

std::vector<double> draw_around(const std::vector<double>& mean,
                                double noise_std, Rng& rng) {
  std::vector<double> v(mean.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = mean[i] + noise_std * rng.gaussian();
  }
  return v;
}

void check_common(int num_classes, int per_class, double separation,
                  double noise_std) {
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
  if (per_class < 1) throw std::invalid_argument("per_class must be >= 1");
  if (!(separation > 0.0)) throw std::invalid_argument("separation must be > 0");
  if (!(noise_std > 0.0)) throw std::invalid_argument("noise_std must be > 0");
}

void append_row(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), " %.17g", v);
  out += buf;
}

}  // namespace

Dataset generate_unimodal(int num_classes, int per_class, int d_x,
                          double separation, double noise_std,
                          std::int64_t seed) {
  check_common(num_classes, per_class, separation, noise_std);
  if (d_x < 2) throw std::invalid_argument("d_x must be >= 2");

  Rng rng(StreamKind::kDataGen, static_cast<std::uint64_t>(seed));
  std::vector<std::vector<double>> means(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    means[c] = unit_direction(d_x, rng);
    for (auto& x : means[c]) x *= separation;
  }

  Dataset ds;
  ds.seed = seed;
  ds.num_classes = num_classes;
  ds.class_separation = separation;
  ds.modality = Modality::kUniModal;
  ds.d_x = d_x;
  ds.d_x2 = d_x;
  ds.pairs.reserve(static_cast<std::size_t>(num_classes) * per_class);
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      PairSample p;
      p.modality = Modality::kUniModal;
      p.anchor = Sample{draw_around(means[c], noise_std, rng), c};
      p.positive = Sample{draw_around(means[c], noise_std, rng), c};
      ds.pairs.push_back(std::move(p));
    }
  }
  return ds;
}

Dataset generate_dualmodal(int num_classes, int per_class, int d1, int d2,
                           double separation, double noise_std,
                           std::int64_t seed) {
  check_common(num_classes, per_class, separation, noise_std);
  if (d1 < 2 || d2 < 2) throw std::invalid_argument("d1 and d2 must be >= 2");

  Rng rng(StreamKind::kDataGen, static_cast<std::uint64_t>(seed));
  std::vector<std::vector<double>> means1(num_classes), means2(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    means1[c] = unit_direction(d1, rng);
    means2[c] = unit_direction(d2, rng);
    for (auto& x : means1[c]) x *= separation;
    for (auto& x : means2[c]) x *= separation;
  }

  Dataset ds;
  ds.seed = seed;
  ds.num_classes = num_classes;
  ds.class_separation = separation;
  ds.modality = Modality::kDualModal;
  ds.d_x = d1;
  ds.d_x2 = d2;
  ds.pairs.reserve(static_cast<std::size_t>(num_classes) * per_class);
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      PairSample p;
      p.modality = Modality::kDualModal;
      p.anchor = Sample{draw_around(means1[c], noise_std, rng), c};
      p.positive = Sample{draw_around(means2[c], noise_std, rng), c};
      ds.pairs.push_back(std::move(p));
    }
  }
  return ds;
}

PairBatch poisson_subsample(const Dataset& ds, double q, std::int64_t seed,
                            std::int64_t step) {
  if (ds.n() == 0) throw std::invalid_argument("dataset is empty");
  if (!(q > 0.0) || q > 1.0) {
    throw std::invalid_argument("sampling ratio q must be in (0, 1]");
  }
  Rng rng(StreamKind::kSubsample, static_cast<std::uint64_t>(seed),
          static_cast<std::uint64_t>(step));
  PairBatch batch;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (rng.uniform() < q) {
      batch.pairs.push_back(ds.pairs[i]);
      batch.source_indices.push_back(i);
    }
  }
  return batch;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds,
                                          int train_per_class) {
  if (train_per_class < 1) {
    throw std::invalid_argument("train_per_class must be >= 1");
  }
  Dataset train = ds;
  Dataset test = ds;
  train.pairs.clear();
  test.pairs.clear();
  std::vector<int> taken(ds.num_classes, 0);
  for (const auto& p : ds.pairs) {
    const int label = p.anchor.label;
    if (label >= 0 && label < ds.num_classes && taken[label] < train_per_class) {
      train.pairs.push_back(p);
      taken[label] += 1;
    } else {
      test.pairs.push_back(p);
    }
  }
  return {std::move(train), std::move(test)};
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << ds.n() << ' ' << ds.d_x << ' ' << ds.d_x2 << ' ' << ds.num_classes
      << ' ' << (ds.modality == Modality::kUniModal ? "uni" : "dual") << '\n';
  std::string line;
  for (const auto& p : ds.pairs) {
    line.clear();
    line += std::to_string(p.anchor.label);
    for (double v : p.anchor.features) append_row(line, v);
    for (double v : p.positive.features) append_row(line, v);
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::size_t n = 0;
  int d_x = 0, d_x2 = 0, num_classes = 0;
  std::string modality_tok;
  if (!(in >> n >> d_x >> d_x2 >> num_classes >> modality_tok)) {
    throw std::runtime_error("bad dataset header: " + path);
  }
  Dataset ds;
  ds.d_x = d_x;
  ds.d_x2 = d_x2;
  ds.num_classes = num_classes;
  if (modality_tok == "uni") {
    ds.modality = Modality::kUniModal;
  } else if (modality_tok == "dual") {
    ds.modality = Modality::kDualModal;
  } else {
    throw std::runtime_error("bad modality token: " + modality_tok);
  }
  ds.pairs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    PairSample& p = ds.pairs[i];
    p.modality = ds.modality;
    int label = 0;
    if (!(in >> label)) throw std::runtime_error("truncated dataset record");
    p.anchor.label = label;
    p.positive.label = label;
    p.anchor.features.resize(d_x);
    p.positive.features.resize(d_x2);
    for (auto& v : p.anchor.features) {
      if (!(in >> v)) throw std::runtime_error("truncated dataset record");
    }
    for (auto& v : p.positive.features) {
      if (!(in >> v)) throw std::runtime_error("truncated dataset record");
    }
  }
  return ds;
}

}  // namespace dpgcl
