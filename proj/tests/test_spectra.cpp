#include <doctest.h>

#include <cmath>
#include <functional>

#include "rq/spectra.hpp"

using namespace rq;

namespace {

// Exhaustive identity-word count over all letter strings of length t.
BigInt brute_return_count(const GroupModel& g, int t) {
  const int a = g.alphabet().size();
  BigInt hits = 0;
  Word w(t);
  std::function<void(int)> rec = [&](int pos) {
    if (pos == t) {
      if (g.is_identity(w)) ++hits;
      return;
    }
    for (Letter x = 0; x < a; ++x) {
      w[pos] = x;
      rec(pos + 1);
    }
  };
  if (t == 0) return 1;
  rec(0);
  return hits;
}

}  // namespace

TEST_CASE("return_prob_exact F2 vs exhaustive enumeration") {
  const GroupModel g = GroupModel::free_group(2);
  const ReturnSeries s = return_prob_exact(g, 10);
  REQUIRE(s.counts.size() == 11);
  CHECK(s.letters == 4);
  for (int t = 0; t <= 10; ++t) {
    CAPTURE(t);
    CHECK(s.counts[t] == brute_return_count(g, t));
  }
}

TEST_CASE("return_prob_exact F3 spot checks") {
  const ReturnSeries s = return_prob_exact(GroupModel::free_group(3), 6);
  // Catalan-style closed values: sum_k C_k-walk counts on the 6-regular tree
  CHECK(s.counts[0] == 1);
  CHECK(s.counts[1] == 0);
  CHECK(s.counts[2] == 6);
  CHECK(s.counts[4] == 6 * 6 + 6 * 5);  // two short excursion shapes
  CHECK(s.counts[6] == brute_return_count(GroupModel::free_group(3), 6));
}

TEST_CASE("return_prob_exact F2 x Z/2 vs exhaustive enumeration") {
  const GroupModel g = GroupModel::parse("direct(free(2), z2)");
  const ReturnSeries s = return_prob_exact(g, 7);
  CHECK(s.letters == 6);
  for (int t = 0; t <= 7; ++t) {
    CAPTURE(t);
    CHECK(s.counts[t] == brute_return_count(g, t));
  }
}

TEST_CASE("return_prob_exact rejects unsupported models") {
  CHECK_THROWS_AS(return_prob_exact(GroupModel::parse("freeprod(z2, z2)"), 4),
                  input_error);
}

TEST_CASE("closed-form spectral radii") {
  CHECK(lambda_free(2) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-15));
  CHECK(lambda_free(4) == doctest::Approx(std::sqrt(7.0) / 4.0).epsilon(1e-15));
  CHECK(kesten_z2_product(4) ==
        doctest::Approx((1.0 + std::sqrt(7.0)) / 5.0).epsilon(1e-15));
  CHECK(kesten_z2_product(8) ==
        doctest::Approx((1.0 + std::sqrt(15.0)) / 9.0).epsilon(1e-15));
}

TEST_CASE("theta closed form and the lambda conversion agree") {
  for (int m = 2; m <= 10; ++m) {
    CAPTURE(m);
    const double direct = theta_free_closed(m);
    const double via_lambda = theta_from_lambda(lambda_free(m), 2 * m);
    CHECK(std::abs(direct - via_lambda) <= 1e-12);
    CHECK(lambda_from_theta(direct, 2 * m) ==
          doctest::Approx(lambda_free(m)).epsilon(1e-12));
  }
}

TEST_CASE("grigorchuk identity: free-group theta pairs with eta = 1/2") {
  // (2m)^theta = 8m-4 = 2 sqrt(2m-1)^... holds exactly at eta = 1/2.
  for (int m = 2; m <= 10; ++m) {
    CAPTURE(m);
    CHECK(std::abs(grigorchuk_residual(theta_free_closed(m), 0.5, m)) <= 1e-12);
    // eta = 1/2 is the quadratic minimum of the Grigorchuk curve, so the
    // inverse is only determined to ~sqrt(residual tol) there.
    CHECK(eta_from_theta(theta_free_closed(m), m) ==
          doctest::Approx(0.5).epsilon(2e-4));
  }
}

TEST_CASE("eta/theta conversion round trip") {
  // away from the eta = 1/2 minimum the inversion is well conditioned
  for (double eta : {0.55, 0.6, 0.75, 0.9, 0.99}) {
    for (int m : {2, 3, 5}) {
      CAPTURE(eta);
      CAPTURE(m);
      const double theta = theta_from_eta(eta, m);
      CHECK(eta_from_theta(theta, m) == doctest::Approx(eta).epsilon(1e-9));
    }
  }
}

TEST_CASE("dp theta converges to the closed form") {
  const ReturnSeries s = return_prob_exact(GroupModel::free_group(2), 400);
  const ThetaEstimate est = gross_cogrowth_from_series(s);
  CHECK(est.t == 400);
  CHECK(est.raw < theta_free_closed(2));  // superadditivity: bias from below
  CHECK(std::abs(est.extrapolated - theta_free_closed(2)) < 5e-3);
  CHECK(std::abs(est.extrapolated - theta_free_closed(2)) <
        std::abs(est.raw - theta_free_closed(2)));  // extrapolation helps
}

TEST_CASE("ball power iteration is a monotone lower bound") {
  const GroupModel g = GroupModel::free_group(2);
  double prev = 0.0;
  for (int rho : {3, 5, 7}) {
    const SpectralEstimate est =
        spectral_radius_ball(CayleyBall(g, rho, 1000000));
    CHECK(est.value > prev);
    CHECK(est.value <= lambda_free(2) + 1e-9);
    prev = est.value;
  }
}

TEST_CASE("ball power iteration on an amenable group hits 1") {
  // Z = free(1): lambda = 1, finite balls approach it from below.
  const SpectralEstimate est =
      spectral_radius_ball(CayleyBall(GroupModel::free_group(1), 200, 10000));
  CHECK(est.value > 0.99);
  CHECK(est.value <= 1.0 + 1e-12);
}

TEST_CASE("growth estimate of the free group") {
  const CayleyBall ball(GroupModel::free_group(2), 9, 1000000);
  const SpectralEstimate est = growth_estimate(ball, 4);
  // growth rate 2m-1 = 3; exponent log_4(3)
  CHECK(est.value == doctest::Approx(std::log(3.0) / std::log(4.0)).epsilon(5e-2));
}

TEST_CASE("cogrowth mc on the free group is censored or tiny") {
  // In F_m itself no nontrivial reduced word is the identity.
  RngStream rng(41, 0);
  const SpectralEstimate est =
      cogrowth_mc_reduced(GroupModel::free_group(2), 12, 2000, rng);
  CHECK(est.censored);
}

TEST_CASE("cogrowth mc sees relations in a quotient-like model") {
  RngStream rng(42, 0);
  const SpectralEstimate est =
      cogrowth_mc_reduced(GroupModel::parse("freeprod(z2, z2)"), 8, 20000, rng);
  CHECK(!est.censored);
  CHECK(est.value > 0.0);
}

TEST_CASE("critical densities per measure") {
  const double theta = theta_free_closed(2);
  CHECK(critical_density(MeasureKind::Plain, theta) ==
        doctest::Approx(1.0 - theta).epsilon(1e-15));
  CHECK(critical_density(MeasureKind::Reduced, 0.5) == doctest::Approx(0.5));
  CHECK(critical_density(MeasureKind::Geodesic, 0.77) == doctest::Approx(0.5));
}

TEST_CASE("norm distribution matches exhaustive enumeration") {
  for (int ell : {1, 2, 5, 8}) {
    CAPTURE(ell);
    const NormDistribution nd = norm_distribution_exact_free(2, ell);
    std::vector<double> brute(ell + 1, 0.0);
    Word w(ell);
    std::function<void(int)> rec = [&](int pos) {
      if (pos == ell) {
        brute[free_reduce(w).size()] += 1.0;
        return;
      }
      for (Letter x = 0; x < 4; ++x) {
        w[pos] = x;
        rec(pos + 1);
      }
    };
    rec(0);
    const double total = std::pow(4.0, ell);
    REQUIRE(nd.p.size() == static_cast<std::size_t>(ell + 1));
    for (int r = 0; r <= ell; ++r)
      CHECK(nd.p[r] == doctest::Approx(brute[r] / total).epsilon(1e-12));
  }
}

TEST_CASE("escape speed of the F2 walk approaches 1/2") {
  const NormDistribution nd = norm_distribution_exact_free(2, 500);
  CHECK(nd.speed == doctest::Approx(0.5).epsilon(2e-2));
}
