#include "dpgcl/accountant.hpp"

#include <cmath>

#include "doctest.h"
#include "dpgcl/errors.hpp"

using namespace dpgcl;

namespace {

// Golden values computed with an arbitrary-precision evaluation of the
// binomial sum (60 decimal digits), frozen here.
struct Golden {
  double q;
  double sigma;
  int alpha;
  double rho;
};
constexpr Golden kGolden[] = {
    {0.01, 1.0, 2, 0.00017181342207454793},
    {0.01, 1.0, 8, 0.00089364390760603185},
    {0.01, 1.0, 32, 11.246275937048069},
    {0.01, 1.0, 64, 27.32173187455178},
    {0.1, 2.0, 16, 0.045291839083621959},
    {0.3, 0.5, 4, 6.3947220657994451},
    {0.001, 5.0, 64, 1.3093021994366717e-6},
};

}  // namespace

TEST_CASE("gaussian RDP closed form") {
  // matches the numerical Renyi-divergence integral for N(0,1) vs N(1,1)
  CHECK(rdp_gaussian(1.0, 2.0) == 1.0);
  CHECK(rdp_gaussian(1e6, 2.0) <= 1e-11);
  // linear in alpha
  CHECK(rdp_gaussian(0.7, 4.0) == 2.0 * rdp_gaussian(0.7, 2.0));
  CHECK_THROWS_AS(rdp_gaussian(0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(rdp_gaussian(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("subsampled RDP at q=1 collapses to the closed form") {
  for (double sigma : {0.5, 1.0, 2.0, 5.0}) {
    for (int alpha = 2; alpha <= 64; ++alpha) {
      const double sub = rdp_subsampled_gaussian(1.0, sigma, alpha);
      const double full = rdp_gaussian(sigma, alpha);
      CHECK(std::abs(sub - full) <= 1e-9);
    }
  }
}

TEST_CASE("subsampled RDP edge cases") {
  CHECK(rdp_subsampled_gaussian(0.0, 1.0, 8) == 0.0);
  CHECK_THROWS_AS(rdp_subsampled_gaussian(0.5, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(rdp_subsampled_gaussian(-0.1, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(rdp_subsampled_gaussian(0.5, 0.0, 2), std::invalid_argument);
}

TEST_CASE("subsampled RDP matches the arbitrary-precision oracle") {
  for (const Golden& g : kGolden) {
    const double got = rdp_subsampled_gaussian(g.q, g.sigma, g.alpha);
    CHECK(got == doctest::Approx(g.rho).epsilon(1e-9));
  }
}

TEST_CASE("rho is nondecreasing in alpha") {
  for (double q : {0.01, 0.3, 1.0}) {
    for (double sigma : {0.5, 1.0, 3.0}) {
      double prev = 0.0;
      for (int alpha = 2; alpha <= 64; ++alpha) {
        const double rho = rdp_subsampled_gaussian(q, sigma, alpha);
        CHECK(rho >= prev - 1e-12);
        prev = rho;
      }
    }
  }
}

TEST_CASE("composition scales elementwise") {
  const RdpCurve curve = rdp_curve(0.1, 1.0, default_orders());
  const RdpCurve zero = compose(curve, 0);
  for (double r : zero.rho) CHECK(r == 0.0);
  const RdpCurve same = compose(curve, 1);
  CHECK(same.rho == curve.rho);
  const RdpCurve hundred = compose(curve, 100);
  for (std::size_t i = 0; i < curve.rho.size(); ++i) {
    CHECK(hundred.rho[i] == doctest::Approx(100.0 * curve.rho[i]).epsilon(1e-15));
  }
}

TEST_CASE("rdp_to_dp matches the exhaustive grid oracle") {
  // pure Gaussian, sigma=1, T=1, delta=1e-5
  RdpCurve curve;
  curve.orders = default_orders();
  for (int a : curve.orders) curve.rho.push_back(rdp_gaussian(1.0, a));
  const DpConversion got = rdp_to_dp(curve, 1e-5);

  double best_eps = 1e300;
  int best_alpha = 0;
  for (int a = 2; a <= 64; ++a) {
    const double eps = a / 2.0 + std::log(1e5) / (a - 1.0);
    if (eps < best_eps) {
      best_eps = eps;
      best_alpha = a;
    }
  }
  CHECK(best_alpha == 6);
  CHECK(got.best_alpha == 6);
  CHECK(got.epsilon == doctest::Approx(best_eps).epsilon(1e-6));
  CHECK(got.epsilon == doctest::Approx(5.302585092994046).epsilon(1e-6));
}

TEST_CASE("scaling every rho strictly increases epsilon") {
  RdpCurve curve = rdp_curve(0.05, 1.0, default_orders());
  curve = compose(curve, 50);
  const double eps1 = rdp_to_dp(curve, 1e-5).epsilon;
  RdpCurve doubled = curve;
  for (auto& r : doubled.rho) r *= 2.0;
  CHECK(rdp_to_dp(doubled, 1e-5).epsilon > eps1);
}

TEST_CASE("delta near one collapses epsilon to min rho") {
  RdpCurve curve = rdp_curve(0.2, 1.5, default_orders());
  curve = compose(curve, 10);
  const double eps = rdp_to_dp(curve, 0.999).epsilon;
  double min_rho = 1e300;
  for (double r : curve.rho) min_rho = std::min(min_rho, r);
  CHECK(eps >= min_rho);
  CHECK(eps <= min_rho + 0.0011);
}

TEST_CASE("epsilon is monotone in sigma, q, and T") {
  const auto orders = default_orders();
  double prev = 1e300;
  for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
    const double eps = certified_epsilon(0.02, sigma, 100, 1e-6, orders);
    CHECK(eps < prev);
    prev = eps;
  }
  prev = 0.0;
  for (double q : {0.005, 0.01, 0.05, 0.2}) {
    const double eps = certified_epsilon(q, 1.0, 100, 1e-6, orders);
    CHECK(eps > prev);
    prev = q == 0.005 ? eps : prev;
    prev = eps;
  }
  prev = 0.0;
  for (std::int64_t T : {10, 100, 1000}) {
    const double eps = certified_epsilon(0.01, 1.0, T, 1e-6, orders);
    CHECK(eps > prev);
    prev = eps;
  }
}

TEST_CASE("calibration certifies the target and is minimal") {
  PrivacySpec spec;
  spec.epsilon_target = 1.0;
  spec.delta = 1e-6;
  spec.q = 0.01;
  spec.T = 100;
  const double sigma = calibrate_sigma(spec);
  // cross-checked against the arbitrary-precision reference (1.34133...)
  CHECK(sigma == doctest::Approx(1.3413).epsilon(5e-3));
  const auto orders = default_orders();
  CHECK(certified_epsilon(spec.q, sigma, spec.T, spec.delta, orders) <= 1.0);
  CHECK(certified_epsilon(spec.q, sigma - kSigmaPrecision, spec.T, spec.delta,
                          orders) > 1.0);
}

TEST_CASE("calibration is monotone in its targets") {
  PrivacySpec spec;
  spec.epsilon_target = 1.0;
  spec.delta = 1e-6;
  spec.q = 0.01;
  spec.T = 100;
  const double base = calibrate_sigma(spec);
  PrivacySpec looser = spec;
  looser.epsilon_target = 2.0;
  CHECK(calibrate_sigma(looser) < base);
  PrivacySpec longer = spec;
  longer.T = 200;
  CHECK(calibrate_sigma(longer) > base);
}

TEST_CASE("infeasible calibration names the bracket") {
  PrivacySpec spec;
  spec.epsilon_target = 1e-9;
  spec.delta = 1e-12;
  spec.q = 0.5;
  spec.T = 10000;
  CHECK_THROWS_AS(calibrate_sigma(spec), CalibrationError);
  try {
    calibrate_sigma(spec);
  } catch (const CalibrationError& e) {
    const std::string what = e.what();
    CHECK(what.find("0.3") != std::string::npos);
    CHECK(what.find("100") != std::string::npos);
  }
}

TEST_CASE("default delta follows 1/(N ln N)") {
  CHECK(default_delta(3) == doctest::Approx(1.0 / (3.0 * std::log(3.0)))
                                .epsilon(1e-15));
  CHECK(default_delta(3) == doctest::Approx(0.30341).epsilon(1e-4));
  // the largest corpus size quoted for this formula
  CHECK(default_delta(190916) == doctest::Approx(4.31e-7).epsilon(5e-3));
  double prev = 1.0;
  for (std::int64_t n : {3, 10, 100, 10000}) {
    const double d = default_delta(n);
    CHECK(d < prev);
    prev = d;
  }
  CHECK_THROWS_AS(default_delta(2), std::invalid_argument);
}

TEST_CASE("certificates re-certify themselves") {
  const PrivacyCertificate cert = certify(0.01, 1.5, 100, 1e-6);
  CHECK(cert.epsilon ==
        doctest::Approx(certified_epsilon(0.01, 1.5, 100, 1e-6,
                                          default_orders()))
            .epsilon(1e-15));
  const PrivacyCertificate non_private = certify(0.01, 0.0, 100, 1e-6);
  CHECK(std::isinf(non_private.epsilon));
}
