#pragma once

#include <string>
#include <vector>

#include "rq/ball.hpp"
#include "rq/bigint.hpp"
#include "rq/measure.hpp"
#include "rq/model.hpp"
#include "rq/rng.hpp"

namespace rq {

enum class Quantity { Growth, Cogrowth, GrossCogrowth, SpectralRadius };
enum class EstMethod { ClosedForm, ExactDP, BallPowerIteration, MonteCarlo, Conversion };

std::string quantity_name(Quantity q);
std::string method_name(EstMethod m);

struct SpectralEstimate {
  Quantity quantity;
  double value = 0.0;
  EstMethod method = EstMethod::ClosedForm;
  long horizon = 0;       // t or rho, whichever applies
  double base = 0.0;      // logarithm base of the exponent quantities
  double stderr_ = -1.0;  // Monte Carlo only; < 0 means not applicable
  bool censored = false;  // zero-hit MC: value is a bound, not an estimate
};

// Exact return probabilities of the simple random walk, as big-integer
// path counts: counts[t] is the number of length-t letter words equal to e,
// so P_t = counts[t] / letters^t.  log_p stores ln P_t (-inf for zero).
struct ReturnSeries {
  std::string model_expr;
  int letters = 0;
  std::vector<BigInt> counts;
  std::vector<double> log_p;
};

// Supported variants: Free(m) (distance birth-death chain) and
// DirectWithFinite(Free(k), Z/2Z) (distance x parity chain).  Anything else
// throws input_error directing to the MC / ball methods.
ReturnSeries return_prob_exact(const GroupModel& model, int T);

struct ThetaEstimate {
  double raw = 0.0;           // theta_hat at the largest even t with P_t > 0
  double extrapolated = 0.0;  // two-point 1/t extrapolation
  long t = 0;
  double base = 0.0;
};

ThetaEstimate gross_cogrowth_from_series(const ReturnSeries& series);

// Closed forms (Kesten): spectral radii of F_k and F_k x Z/2Z (the latter
// on the 2k+2-letter generating set), and the free-group gross cogrowth.
double lambda_free(int k);
double kesten_z2_product(int k);
double theta_free_closed(int m);  // (1/2) log_{2m}(8m-4)

double theta_from_lambda(double lambda, int letter_count);
double lambda_from_theta(double theta, int letter_count);

// Solve (2m)^theta = (2m-1)^eta + (2m-1)^(1-eta) for eta in [1/2, 1]
// (monotone bisection to 1e-12 residual), and its inverse.
double eta_from_theta(double theta, int m);
double theta_from_eta(double eta, int m);
double grigorchuk_residual(double theta, double eta, int m);

SpectralEstimate cogrowth_mc_reduced(const GroupModel& model, int ell,
                                     std::uint64_t trials, RngStream& rng);

SpectralEstimate growth_estimate(const CayleyBall& ball, int letter_count);

// Rayleigh quotient of the walk operator restricted to the ball: a
// certified lower bound for the spectral radius, monotone in the radius.
SpectralEstimate spectral_radius_ball(const CayleyBall& ball, double tol = 1e-9,
                                      long max_iter = 200000);

// Critical density of the matching word model: plain 1-theta, reduced
// 1-eta, geodesic 1/2.
double critical_density(MeasureKind kind, double estimate);

struct NormDistribution {
  int m = 0;
  int ell = 0;
  std::vector<double> p;  // law of |B_ell|, index = norm
  double mean = 0.0;
  double speed = 0.0;  // mean / ell
};

NormDistribution norm_distribution_exact_free(int m, int ell);

}  // namespace rq
