#pragma once

#include <cstdint>
#include <vector>

namespace dpgcl {

// The accountant's sigma is the noise multiplier relative to the mechanism's
// sensitivity; the 2C factor applied when noising gradients is invisible
// here.
struct PrivacySpec {
  double epsilon_target = 1.0;
  double delta = 1e-6;
  double q = 0.01;        // Poisson sampling ratio
  std::int64_t T = 100;   // composed steps
  double sigma = 0.0;     // noise multiplier (0 = to be calibrated)
  std::vector<int> orders;  // Renyi orders, ascending, each >= 2
};

// Integer orders 2..64: the subsampled-Gaussian bound has an exact finite
// binomial form at integer orders.
std::vector<int> default_orders();

struct RdpCurve {
  std::vector<int> orders;
  std::vector<double> rho;  // accumulated cost per order
};

// Renyi divergence of order alpha between N(0, sigma^2) and N(1, sigma^2):
// alpha / (2 sigma^2).
double rdp_gaussian(double sigma, double alpha);

// Integer-order upper bound for the Poisson-subsampled Gaussian mechanism:
//   rho(a) = log( sum_{k=0..a} C(a,k) (1-q)^(a-k) q^k e^{k(k-1)/(2 sigma^2)} ) / (a-1)
// evaluated in log space. Reduces to rdp_gaussian at q = 1 and to 0 at q = 0.
double rdp_subsampled_gaussian(double q, double sigma, int alpha);

RdpCurve rdp_curve(double q, double sigma, const std::vector<int>& orders);

// Composition over T steps multiplies every order's cost by T.
RdpCurve compose(const RdpCurve& per_step, std::int64_t T);

struct DpConversion {
  double epsilon = 0.0;
  int best_alpha = 0;
};

// Classic conversion: eps = min_alpha rho(alpha) + log(1/delta)/(alpha-1).
DpConversion rdp_to_dp(const RdpCurve& curve, double delta);

// Certified epsilon for a fully specified mechanism; +infinity when sigma=0.
double certified_epsilon(double q, double sigma, std::int64_t T, double delta,
                         const std::vector<int>& orders);

inline constexpr double kSigmaBracketLo = 0.3;
inline constexpr double kSigmaBracketHi = 100.0;
inline constexpr double kSigmaPrecision = 1e-3;

// Binary search for the smallest sigma in [0.3, 100] (to 1e-3) whose
// certified epsilon meets the target. Throws CalibrationError when no sigma
// in the bracket works.
double calibrate_sigma(const PrivacySpec& spec);

// delta = 1 / (N ln N), the convention for dataset size N.
double default_delta(std::int64_t N);

// What the trainer demands before it will run: the accountant's statement
// about the exact (q, sigma, T, delta) being executed.
struct PrivacyCertificate {
  double epsilon = 0.0;  // +infinity marks a deliberately non-private run
  double delta = 0.0;
  double q = 0.0;
  double sigma = 0.0;
  std::int64_t T = 0;
};

PrivacyCertificate certify(double q, double sigma, std::int64_t T,
                           double delta);

}  // namespace dpgcl
