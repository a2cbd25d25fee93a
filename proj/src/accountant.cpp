#include "dpgcl/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dpgcl/errors.hpp"

namespace dpgcl {

namespace {

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Sums the shifted exponentials pairwise; all terms are nonnegative, so the
// only concern is accumulation error across many magnitudes.
double pairwise_sum(const std::vector<double>& v, std::size_t lo,
                    std::size_t hi) {
  if (hi - lo <= 4) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace

std::vector<int> default_orders() {
  std::vector<int> orders;
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  return orders;
}

double rdp_gaussian(double sigma, double alpha) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
  return alpha / (2.0 * sigma * sigma);
}

double rdp_subsampled_gaussian(double q, double sigma, int alpha) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (alpha < 2) {
    throw std::invalid_argument("integer-order bound needs alpha >= 2");
  }
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("q must be in [0, 1]");
  if (q == 0.0) return 0.0;

  // log of each binomial term; skip terms whose probability factor is zero.
  std::vector<double> log_terms;
  log_terms.reserve(alpha + 1);
  const double log_q = std::log(q);
  const double log_1mq = q < 1.0 ? std::log1p(-q) : 0.0;
  for (int k = 0; k <= alpha; ++k) {
    if (q == 1.0 && k < alpha) continue;
    double lt = log_binomial(alpha, k) + k * log_q;
    if (alpha - k > 0) lt += (alpha - k) * log_1mq;
    lt += k * (k - 1.0) / (2.0 * sigma * sigma);
    log_terms.push_back(lt);
  }
  const double mx = *std::max_element(log_terms.begin(), log_terms.end());
  std::vector<double> shifted(log_terms.size());
  for (std::size_t i = 0; i < log_terms.size(); ++i) {
    shifted[i] = std::exp(log_terms[i] - mx);
  }
  const double lse = mx + std::log(pairwise_sum(shifted, 0, shifted.size()));
  return lse / (alpha - 1.0);
}

RdpCurve rdp_curve(double q, double sigma, const std::vector<int>& orders) {
  if (orders.empty()) throw std::invalid_argument("order grid is empty");
  RdpCurve curve;
  curve.orders = orders;
  curve.rho.reserve(orders.size());
  for (int a : orders) curve.rho.push_back(rdp_subsampled_gaussian(q, sigma, a));
  return curve;
}

RdpCurve compose(const RdpCurve& per_step, std::int64_t T) {
  if (T < 0) throw std::invalid_argument("T must be >= 0");
  RdpCurve out = per_step;
  for (auto& r : out.rho) r *= static_cast<double>(T);
  return out;
}

DpConversion rdp_to_dp(const RdpCurve& curve, double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("delta must be in (0, 1)");
  }
  if (curve.orders.empty()) throw std::invalid_argument("empty RDP curve");
  const double log_inv_delta = std::log(1.0 / delta);
  DpConversion best;
  best.epsilon = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    const double a = curve.orders[i];
    const double eps = curve.rho[i] + log_inv_delta / (a - 1.0);
    if (eps < best.epsilon) {
      best.epsilon = eps;
      best.best_alpha = curve.orders[i];
    }
  }
  return best;
}

double certified_epsilon(double q, double sigma, std::int64_t T, double delta,
                         const std::vector<int>& orders) {
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  return rdp_to_dp(compose(rdp_curve(q, sigma, orders), T), delta).epsilon;
}

double calibrate_sigma(const PrivacySpec& spec) {
  if (!(spec.epsilon_target > 0.0)) {
    throw std::invalid_argument("epsilon target must be > 0");
  }
  if (!(spec.delta > 0.0) || !(spec.delta < 1.0)) {
    throw std::invalid_argument("delta must be in (0, 1)");
  }
  const auto orders = spec.orders.empty() ? default_orders() : spec.orders;
  const auto eps_at = [&](double sigma) {
    return certified_epsilon(spec.q, sigma, spec.T, spec.delta, orders);
  };

  double lo = kSigmaBracketLo;
  double hi = kSigmaBracketHi;
  if (eps_at(hi) > spec.epsilon_target) {
    std::ostringstream msg;
    msg << "cannot reach epsilon <= " << spec.epsilon_target
        << " with sigma in [" << kSigmaBracketLo << ", " << kSigmaBracketHi
        << "]";
    throw CalibrationError(msg.str());
  }
  if (eps_at(lo) <= spec.epsilon_target) {
    // The bracket's low end already certifies; report it rather than search
    // below the supported range.
    return lo;
  }
  while (hi - lo > kSigmaPrecision) {
    const double mid = 0.5 * (lo + hi);
    if (eps_at(mid) <= spec.epsilon_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double default_delta(std::int64_t N) {
  if (N < 3) throw std::invalid_argument("N must be >= 3");
  const double n = static_cast<double>(N);
  return 1.0 / (n * std::log(n));
}

PrivacyCertificate certify(double q, double sigma, std::int64_t T,
                           double delta) {
  PrivacyCertificate cert;
  cert.q = q;
  cert.sigma = sigma;
  cert.T = T;
  cert.delta = delta;
  cert.epsilon = certified_epsilon(q, sigma, T, delta, default_orders());
  return cert;
}

}  // namespace dpgcl
