#include "rq/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rq/errors.hpp"

namespace rq {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string quantity_name(Quantity q) {
  switch (q) {
    case Quantity::Growth:
      return "g";
    case Quantity::Cogrowth:
      return "eta";
    case Quantity::GrossCogrowth:
      return "theta";
    case Quantity::SpectralRadius:
      return "lambda";
  }
  return "?";
}

std::string method_name(EstMethod m) {
  switch (m) {
    case EstMethod::ClosedForm:
      return "closed";
    case EstMethod::ExactDP:
      return "dp";
    case EstMethod::BallPowerIteration:
      return "ball";
    case EstMethod::MonteCarlo:
      return "mc";
    case EstMethod::Conversion:
      return "conversion";
  }
  return "?";
}

ReturnSeries return_prob_exact(const GroupModel& model, int T) {
  if (T < 0) throw input_error("return_prob_exact: negative horizon");
  ReturnSeries out;
  out.model_expr = model.expr();

  const int m_free = model.free_rank();
  const int k_z2 = model.free_times_z2_rank();

  out.counts.reserve(T + 1);

  if (m_free > 0) {
    // Distance chain on F_m: from distance r > 0, 2m-1 letters go up and
    // exactly one (the inverse of the last letter) goes down.
    const int a = 2 * m_free;
    out.letters = a;
    std::vector<BigInt> cur(T + 2), nxt(T + 2);
    cur[0] = 1;
    out.counts.push_back(1);
    for (int t = 1; t <= T; ++t) {
      for (auto& v : nxt) v = 0;
      for (int r = 0; r <= t; ++r) {
        if (cur[r] == 0) continue;
        if (r == 0) {
          nxt[1] += cur[0] * a;
        } else {
          nxt[r + 1] += cur[r] * (a - 1);
          nxt[r - 1] += cur[r];
        }
      }
      std::swap(cur, nxt);
      out.counts.push_back(cur[0]);
    }
  } else if (k_z2 > 0) {
    // Distance x parity chain on F_k x Z/2Z over 2k+2 letters: the two
    // u-slots flip the parity, the free letters move the distance.
    const int a = 2 * k_z2 + 2;
    out.letters = a;
    auto idx = [](int r, int par) { return 2 * r + par; };
    std::vector<BigInt> cur(2 * (T + 2)), nxt(2 * (T + 2));
    cur[idx(0, 0)] = 1;
    out.counts.push_back(1);
    for (int t = 1; t <= T; ++t) {
      for (auto& v : nxt) v = 0;
      for (int r = 0; r <= t; ++r) {
        for (int par = 0; par < 2; ++par) {
          const BigInt& c = cur[idx(r, par)];
          if (c == 0) continue;
          nxt[idx(r, 1 - par)] += c * 2;
          if (r == 0) {
            nxt[idx(1, par)] += c * (2 * k_z2);
          } else {
            nxt[idx(r + 1, par)] += c * (2 * k_z2 - 1);
            nxt[idx(r - 1, par)] += c;
          }
        }
      }
      std::swap(cur, nxt);
      out.counts.push_back(cur[idx(0, 0)]);
    }
  } else {
    throw input_error(
        "return_prob_exact: supported variants are free(m) and "
        "direct(free(k), z2); use the mc or ball methods for " +
        model.expr());
  }

  out.log_p.reserve(out.counts.size());
  const double log_a = std::log(static_cast<double>(out.letters));
  for (std::size_t t = 0; t < out.counts.size(); ++t) {
    out.log_p.push_back(out.counts[t] == 0
                            ? kNegInf
                            : log_bigint(out.counts[t]) - static_cast<double>(t) * log_a);
  }
  return out;
}

ThetaEstimate gross_cogrowth_from_series(const ReturnSeries& series) {
  const double log_a = std::log(static_cast<double>(series.letters));
  auto theta_at = [&](long t) {
    return 1.0 + series.log_p[t] / (static_cast<double>(t) * log_a);
  };
  long t = static_cast<long>(series.log_p.size()) - 1;
  t -= t % 2;
  while (t >= 2 && series.log_p[t] == kNegInf) t -= 2;
  if (t < 2)
    throw numeric_error("gross_cogrowth_from_series: no nonzero even entries");

  ThetaEstimate est;
  est.t = t;
  est.base = static_cast<double>(series.letters);
  est.raw = theta_at(t);
  if (t >= 4 && series.log_p[t - 2] != kNegInf) {
    // theta_hat(t) = theta + c/t: eliminate the 1/t term with two points.
    double prev = theta_at(t - 2);
    est.extrapolated =
        (static_cast<double>(t) * est.raw - static_cast<double>(t - 2) * prev) / 2.0;
  } else {
    est.extrapolated = est.raw;
  }
  return est;
}

double lambda_free(int k) {
  if (k < 1) throw input_error("lambda_free: k must be >= 1");
  return std::sqrt(2.0 * k - 1.0) / static_cast<double>(k);
}

double kesten_z2_product(int k) {
  if (k < 1) throw input_error("kesten_z2_product: k must be >= 1");
  return (1.0 + std::sqrt(2.0 * k - 1.0)) / static_cast<double>(k + 1);
}

double theta_free_closed(int m) {
  if (m < 1) throw input_error("theta_free_closed: m must be >= 1");
  return 0.5 * std::log(8.0 * m - 4.0) / std::log(2.0 * m);
}

double theta_from_lambda(double lambda, int letter_count) {
  if (lambda <= 0.0 || lambda > 1.0)
    throw input_error("theta_from_lambda: lambda outside (0,1]");
  return 1.0 + std::log(lambda) / std::log(static_cast<double>(letter_count));
}

double lambda_from_theta(double theta, int letter_count) {
  return std::pow(static_cast<double>(letter_count), theta - 1.0);
}

double grigorchuk_residual(double theta, double eta, int m) {
  const double a = 2.0 * m, b = 2.0 * m - 1.0;
  return std::pow(a, theta) - std::pow(b, eta) - std::pow(b, 1.0 - eta);
}

double eta_from_theta(double theta, int m) {
  const double a = 2.0 * m, b = 2.0 * m - 1.0;
  const double lhs = std::pow(a, theta);
  const double floor_rhs = 2.0 * std::sqrt(b);  // minimum of the right side
  if (lhs < floor_rhs - 1e-9)
    throw numeric_error("eta_from_theta: (2m)^theta below 2*sqrt(2m-1), no real eta");
  // rhs is increasing in eta on [1/2, 1].
  double lo = 0.5, hi = 1.0;
  if (lhs >= std::pow(b, 1.0) + 1.0) return 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double r = std::pow(b, mid) + std::pow(b, 1.0 - mid) - lhs;
    if (std::abs(r) < 1e-12) return mid;
    (r < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double theta_from_eta(double eta, int m) {
  if (eta < 0.5 || eta > 1.0) throw input_error("theta_from_eta: eta outside [1/2,1]");
  const double a = 2.0 * m, b = 2.0 * m - 1.0;
  return std::log(std::pow(b, eta) + std::pow(b, 1.0 - eta)) / std::log(a);
}

SpectralEstimate cogrowth_mc_reduced(const GroupModel& model, int ell,
                                     std::uint64_t trials, RngStream& rng) {
  const int m = model.alphabet().generators();
  MeasureSpec spec(MeasureKind::Reduced, m, ell);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    Word w = sample_word(spec, rng);
    if (model.is_identity(w)) ++hits;
  }
  SpectralEstimate est;
  est.quantity = Quantity::Cogrowth;
  est.method = EstMethod::MonteCarlo;
  est.horizon = ell;
  est.base = 2.0 * m - 1.0;
  const double log_b = std::log(est.base);
  const double log_total = log_bigint(count_words(MeasureKind::Reduced, m, ell));
  if (hits == 0) {
    // Censored: every class count below ~1/trials is compatible with the
    // data; report the detection-limit bound.
    est.censored = true;
    est.value = (log_total - std::log(static_cast<double>(trials))) /
                (static_cast<double>(ell) * log_b);
    return est;
  }
  const double p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  est.value = (std::log(p_hat) + log_total) / (static_cast<double>(ell) * log_b);
  // Delta method on the binomial proportion.
  const double se_p = std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
  est.stderr_ = se_p / (p_hat * static_cast<double>(ell) * log_b);
  return est;
}

SpectralEstimate growth_estimate(const CayleyBall& ball, int letter_count) {
  if (ball.radius() < 2) throw input_error("growth_estimate: need radius >= 2");
  SpectralEstimate est;
  est.quantity = Quantity::Growth;
  est.method = EstMethod::BallPowerIteration;  // ball-backed, no iteration
  est.horizon = ball.radius();
  est.base = static_cast<double>(letter_count);
  est.value = std::log(static_cast<double>(ball.sphere_size(ball.radius()))) /
              (static_cast<double>(ball.radius()) * std::log(est.base));
  return est;
}

SpectralEstimate spectral_radius_ball(const CayleyBall& ball, double tol,
                                      long max_iter) {
  const std::size_t n = ball.size();
  const int a = ball.letters();
  // Power iteration on (I + A/a): the shift makes the top eigenvalue
  // strictly dominant even on bipartite balls.  The Rayleigh quotient of
  // A/a at any unit vector is a certified lower bound for lambda.
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), w(n);
  double prev = -2.0;
  double rayleigh = 0.0;
  for (long it = 0; it < max_iter; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = v[i];
      for (int x = 0; x < a; ++x) {
        auto j = ball.neighbor(i, static_cast<Letter>(x));
        if (j >= 0) w[j] += vi;
      }
    }
    double dot = 0.0, nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] /= a;
      dot += w[i] * v[i];
    }
    rayleigh = dot;  // v' (A/a) v with unit v
    for (std::size_t i = 0; i < n; ++i) {
      w[i] += v[i];
      nrm += w[i] * w[i];
    }
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nrm;
    if (std::abs(rayleigh - prev) < tol) {
      SpectralEstimate est;
      est.quantity = Quantity::SpectralRadius;
      est.method = EstMethod::BallPowerIteration;
      est.horizon = ball.radius();
      est.base = static_cast<double>(a);
      est.value = rayleigh;
      return est;
    }
    prev = rayleigh;
  }
  throw numeric_error("spectral_radius_ball: power iteration did not converge");
}

double critical_density(MeasureKind kind, double estimate) {
  switch (kind) {
    case MeasureKind::Plain:
      return 1.0 - estimate;  // estimate = theta
    case MeasureKind::Reduced:
    case MeasureKind::CyclicallyReduced:
      return 1.0 - estimate;  // estimate = eta
    case MeasureKind::Geodesic:
      return 0.5;  // in the sphere-count base, independent of the estimate
  }
  throw numeric_error("critical_density: unreachable");
}

NormDistribution norm_distribution_exact_free(int m, int ell) {
  if (m < 1 || ell < 0) throw input_error("norm_distribution_exact_free: bad args");
  const double a = 2.0 * m;
  std::vector<double> cur(ell + 2, 0.0), nxt(ell + 2, 0.0);
  cur[0] = 1.0;
  for (int t = 1; t <= ell; ++t) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (int r = 0; r <= t; ++r) {
      const double c = cur[r];
      if (c == 0.0) continue;
      if (r == 0) {
        nxt[1] += c;
      } else {
        nxt[r + 1] += c * (a - 1.0) / a;
        nxt[r - 1] += c / a;
      }
    }
    std::swap(cur, nxt);
  }
  NormDistribution out;
  out.m = m;
  out.ell = ell;
  out.p.assign(cur.begin(), cur.begin() + ell + 1);
  for (int r = 0; r <= ell; ++r) out.mean += r * out.p[r];
  out.speed = ell > 0 ? out.mean / ell : 0.0;
  return out;
}

}  // namespace rq
