// Acceptance gate: one criterion per invocation (argv[1] = 1..10), one
// PASS/FAIL line each.  Criteria 1..9 write their JSONL payloads under
// acceptance_out/; criterion 10 re-runs every generator with the same seeds
// and compares the bytes against those artifacts.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "rq/diagrams.hpp"
#include "rq/measure.hpp"
#include "rq/phase.hpp"
#include "rq/records.hpp"
#include "rq/spectra.hpp"

using namespace rq;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
  std::string jsonl;
};

void require(Result& r, bool cond, const std::string& what) {
  if (!cond) {
    r.pass = false;
    if (!r.detail.empty()) r.detail += "; ";
    r.detail += what;
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

void emit(Result& r, const std::string& tag, std::uint64_t seed, Json payload) {
  std::ostringstream out;
  write_jsonl(out, make_record(tag, seed, Json::object(), std::move(payload)));
  r.jsonl += out.str();
}

// ---------------------------------------------------------------------- 1

Result criterion_1() {
  Result r;
  const double l_f4 = lambda_free(4);
  const double l_f4z2 = kesten_z2_product(4);
  const double l_g2 = kesten_z2_product(8);
  require(r, std::abs(l_f4 - std::sqrt(7.0) / 4.0) <= 1e-14, "lambda(F4)");
  require(r, std::abs(l_f4z2 - (1.0 + std::sqrt(7.0)) / 5.0) <= 1e-14,
          "lambda(F4 x Z/2)");
  require(r, std::abs(l_g2 - (1.0 + std::sqrt(15.0)) / 9.0) <= 1e-14,
          "lambda(G2)");

  const double theta_g2 = theta_from_lambda(l_g2, 18);
  require(r, std::abs(theta_g2 - 0.7877) <= 5e-4,
          "theta(G2)=" + fmt(theta_g2) + " not within .788 +- 5e-4");
  const double dcrit = critical_density(MeasureKind::Plain, theta_g2);
  require(r, std::abs(dcrit - 0.2123) <= 5e-4,
          "dcrit(G2)=" + fmt(dcrit) + " not within .212 +- 5e-4");

  const double log18_10 = std::log(10.0) / std::log(18.0);
  require(r, std::abs(log18_10 - 0.7966) <= 5e-4, "log_18(10)=" + fmt(log18_10));
  const double dc_bound = 1.0 - log18_10;
  require(r, std::abs(dc_bound - 0.2034) <= 5e-4, "d_C bound=" + fmt(dc_bound));

  emit(r, "acceptance-1", 0,
       Json{{"lambda_f4", l_f4},
            {"lambda_f4z2", l_f4z2},
            {"lambda_g2", l_g2},
            {"theta_g2", theta_g2},
            {"dcrit_g2", dcrit},
            {"log18_10", log18_10},
            {"dc_bound", dc_bound}});
  return r;
}

// ---------------------------------------------------------------------- 2

Result criterion_2() {
  Result r;
  Json table = Json::array();
  for (int m = 2; m <= 10; ++m) {
    const double closed = theta_free_closed(m);
    const double via_lambda = theta_from_lambda(lambda_free(m), 2 * m);
    const double residual = grigorchuk_residual(closed, 0.5, m);
    require(r, std::abs(closed - via_lambda) <= 1e-12,
            "theta mismatch at m=" + std::to_string(m));
    require(r, std::abs(residual) <= 1e-12,
            "grigorchuk residual at m=" + std::to_string(m));
    table.push_back(Json{{"m", m}, {"theta", closed}, {"residual", residual}});
  }
  emit(r, "acceptance-2", 0, Json{{"triangle", std::move(table)}});
  return r;
}

// ---------------------------------------------------------------------- 3

// Exact identity-word counts in F2 by reduced-stack DFS over all 4^t words.
BigInt brute_f2_returns(int t) {
  BigInt hits = 0;
  Word stack;
  std::function<void(int)> rec = [&](int left) {
    if (left == 0) {
      if (stack.empty()) ++hits;
      return;
    }
    for (Letter x = 0; x < 4; ++x) {
      if (!stack.empty() && stack.back() == Alphabet::inv(x)) {
        const Letter popped = stack.back();
        stack.pop_back();
        rec(left - 1);
        stack.push_back(popped);
      } else {
        stack.push_back(x);
        rec(left - 1);
        stack.pop_back();
      }
    }
  };
  rec(t);
  return hits;
}

Result criterion_3() {
  Result r;
  const ReturnSeries f2 = return_prob_exact(GroupModel::free_group(2), 10);
  Json counts = Json::array();
  for (int t = 0; t <= 10; ++t) {
    require(r, f2.counts[t] == brute_f2_returns(t),
            "F2 return count mismatch at t=" + std::to_string(t));
    counts.push_back(f2.counts[t].str());
  }

  const GroupModel g2 = GroupModel::parse("direct(free(8), z2)");
  const ThetaEstimate est = gross_cogrowth_from_series(return_prob_exact(g2, 4000));
  const double ref = theta_from_lambda(kesten_z2_product(8), 18);
  require(r, std::abs(est.extrapolated - ref) <= 5e-3,
          "F8xZ/2 dp theta=" + fmt(est.extrapolated) + " vs " + fmt(ref));

  emit(r, "acceptance-3", 0,
       Json{{"f2_counts", std::move(counts)},
            {"g2_theta_raw", est.raw},
            {"g2_theta_extrapolated", est.extrapolated},
            {"g2_theta_reference", ref}});
  return r;
}

// ---------------------------------------------------------------------- 4

Result criterion_4() {
  Result r;
  const GroupModel f2 = GroupModel::free_group(2);
  std::vector<double> bounds;
  for (int rho : {4, 6, 8})
    bounds.push_back(spectral_radius_ball(CayleyBall(f2, rho, 5000000)).value);
  require(r, bounds[0] < bounds[1] && bounds[1] < bounds[2],
          "F2 bounds not strictly increasing");
  for (double b : bounds)
    require(r, b <= lambda_free(2) + 1e-9, "F2 bound exceeds sqrt(3)/2");

  const GroupModel g1 = GroupModel::parse("freeprod(direct(free(4), z2), free(4))");
  const double g1_bound = spectral_radius_ball(CayleyBall(g1, 4, 5000000)).value;
  require(r, g1_bound <= kesten_z2_product(8) + 1e-9,
          "G1 bound " + fmt(g1_bound) + " exceeds lambda(G2)");

  emit(r, "acceptance-4", 0,
       Json{{"f2_bounds", bounds},
            {"g1_bound", g1_bound},
            {"lambda_g2", kesten_z2_product(8)}});
  return r;
}

// ---------------------------------------------------------------------- 5

Result criterion_5() {
  Result r;
  SweepConfig cfg;
  cfg.group_expr = "free(2)";
  cfg.measure = MeasureKind::Reduced;
  cfg.m = 2;
  cfg.ells = {14, 17, 20, 23};
  cfg.densities = {0.35, 0.65};
  cfg.trials = 50;
  cfg.master_seed = 20260501;
  cfg.budget = 20000000;
  const auto records = phase_sweep(cfg);

  struct Cell {
    int collapsed = 0, total = 0;
    double obs = 0.0, expect = 0.0;
  };
  std::map<std::pair<int, double>, Cell> cells;
  for (const auto& rec : records) {
    auto& c = cells[{rec.ell, rec.d}];
    require(r, rec.verdict != "skipped",
            "skipped cell at ell=" + std::to_string(rec.ell));
    ++c.total;
    if (rec.verdict == "trivial" || rec.verdict == "z2") ++c.collapsed;
    c.obs += static_cast<double>(rec.collisions);
    c.expect += rec.birthday_expect;
    r.jsonl += sweep_record_json(rec).dump() + "\n";
  }

  int birthday_ok = 0;
  Json cells_json = Json::array();
  for (const auto& [key, c] : cells) {
    const double sigma = std::sqrt(c.expect);
    const bool ok = std::abs(c.obs - c.expect) <= 3.0 * sigma;
    birthday_ok += ok ? 1 : 0;
    cells_json.push_back(Json{{"ell", key.first},
                              {"d", key.second},
                              {"fraction", static_cast<double>(c.collapsed) / c.total},
                              {"collisions", c.obs},
                              {"expected", c.expect},
                              {"birthday_3sigma", ok}});
  }
  for (int ell : cfg.ells) {
    const auto& lo = cells[{ell, 0.35}];
    const auto& hi = cells[{ell, 0.65}];
    const double gap = static_cast<double>(hi.collapsed) / hi.total -
                       static_cast<double>(lo.collapsed) / lo.total;
    require(r, gap >= 0.5,
            "collapse gap " + fmt(gap) + " < 0.5 at ell=" + std::to_string(ell));
  }
  require(r, birthday_ok * 10 >= static_cast<int>(cells.size()) * 9,
          "birthday check passed only " + std::to_string(birthday_ok) + "/" +
              std::to_string(cells.size()) + " cells");

  emit(r, "acceptance-5", cfg.master_seed, Json{{"cells", std::move(cells_json)}});
  return r;
}

// ---------------------------------------------------------------------- 6

Result criterion_6() {
  Result r;
  const std::uint64_t master = 20260601;
  // d = 0.2 gives floor(3^40) relators, far beyond what fits in memory.  A
  // piece of length >= 34 between the first j relators stays a piece of the
  // full set, so drawing relators one at a time and stopping at the first
  // witness decides "violates C'(1/6)" exactly for the capped prefix.
  // Calibration: matching 34-letter window pairs arrive at rate
  // n^2/2 * 2 * 200^2 / (4 * 3^33), and a maximal match of length L covers
  // L-33 aligned windows, so distinct pieces appear at 2/3 that rate
  // (E ~ 4.7 at the cap).  A capped prefix therefore misses its witness
  // with probability ~1%, well inside the 5-seed allowance.
  const std::uint64_t high_cap = 2000000;
  const int threshold = 200 / 6 + 1;  // C'(1/6) fails iff a piece reaches 34
  int sat_low = 0, viol_high = 0;
  Json per_seed = Json::array();
  MeasureSpec spec(MeasureKind::CyclicallyReduced, 2, 200);
  PieceThresholdScanner scanner(spec.ell, threshold, high_cap);
  for (int trial = 0; trial < 100; ++trial) {
    {
      RngStream rng(master, 2 * trial);
      const RelatorSet rs = sample_relator_set(spec, 0.05, rng, master);
      const auto rep = small_cancellation_check(rs, true);
      sat_low += rep.satisfies ? 1 : 0;
      per_seed.push_back(Json{{"trial", trial},
                              {"d", 0.05},
                              {"n", rs.size()},
                              {"satisfies", rep.satisfies},
                              {"max_piece", rep.max_piece}});
    }
    {
      RngStream rng(master, 2 * trial + 1);
      if (trial > 0) scanner.reset();
      std::uint64_t used = 0;
      while (used < high_cap) {
        const Word w = sample_word(spec, rng);
        ++used;
        if (scanner.add(std::span<const Letter>(w.data(), w.size()))) break;
      }
      const bool violates = scanner.finish();
      viol_high += violates ? 1 : 0;
      per_seed.push_back(
          Json{{"trial", trial},
               {"d", 0.2},
               {"n", used},
               {"satisfies", !violates},
               {"max_piece", violates ? scanner.witness().length
                                      : threshold - 1}});
    }
  }
  require(r, sat_low >= 95,
          "C'(1/6) satisfied in only " + std::to_string(sat_low) + "/100 at d=0.05");
  require(r, viol_high >= 95,
          "C'(1/6) violated in only " + std::to_string(viol_high) + "/100 at d=0.2");
  emit(r, "acceptance-6", master,
       Json{{"satisfied_low", sat_low},
            {"violated_high", viol_high},
            {"seeds", std::move(per_seed)}});
  return r;
}

// ---------------------------------------------------------------------- 7

// Minor-gcd SNF oracle for small matrices (fraction-free determinants).
std::vector<BigInt> minor_gcd_snf(const std::vector<std::vector<BigInt>>& a) {
  const int rows = static_cast<int>(a.size());
  const int cols = rows ? static_cast<int>(a[0].size()) : 0;
  const int n = std::min(rows, cols);
  std::vector<BigInt> out;
  BigInt prev = 1;
  for (int k = 1; k <= n; ++k) {
    std::vector<int> ri(k), ci(k);
    BigInt g = 0;
    std::function<BigInt()> det = [&]() {
      std::vector<std::vector<BigRat>> mtx(k, std::vector<BigRat>(k));
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) mtx[i][j] = BigRat(a[ri[i]][ci[j]]);
      BigRat d = 1;
      for (int p = 0; p < k; ++p) {
        int piv = -1;
        for (int q = p; q < k; ++q)
          if (mtx[q][p] != 0) {
            piv = q;
            break;
          }
        if (piv < 0) return BigInt(0);
        if (piv != p) {
          std::swap(mtx[piv], mtx[p]);
          d = -d;
        }
        d *= mtx[p][p];
        for (int q = p + 1; q < k; ++q) {
          const BigRat f = mtx[q][p] / mtx[p][p];
          for (int c = p; c < k; ++c) mtx[q][c] -= f * mtx[p][c];
        }
      }
      return boost::multiprecision::numerator(d);
    };
    std::function<void(int, int)> pick_cols = [&](int idx, int from) {
      if (idx == k) {
        g = boost::multiprecision::gcd(g, boost::multiprecision::abs(det()));
        return;
      }
      for (int c = from; c < cols; ++c) {
        ci[idx] = c;
        pick_cols(idx + 1, c + 1);
      }
    };
    std::function<void(int, int)> pick_rows = [&](int idx, int from) {
      if (idx == k) {
        pick_cols(0, 0);
        return;
      }
      for (int q = from; q < rows; ++q) {
        ri[idx] = q;
        pick_rows(idx + 1, q + 1);
      }
    };
    pick_rows(0, 0);
    if (g == 0) {
      for (int q = k; q <= n; ++q) out.push_back(0);
      return out;
    }
    out.push_back(g / prev);
    prev = g;
  }
  return out;
}

Result criterion_7() {
  Result r;
  const std::uint64_t master = 20260701;
  RngStream mrng(master, 0);
  int snf_ok = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int rows = 1 + mrng.bounded(4);
    const int cols = 1 + mrng.bounded(4);
    std::vector<std::vector<BigInt>> a(rows, std::vector<BigInt>(cols));
    for (auto& row : a)
      for (auto& v : row) v = static_cast<long>(mrng.bounded(21)) - 10;
    if (smith_invariant_factors(a) == minor_gcd_snf(a)) ++snf_ok;
  }
  require(r, snf_ok == 1000,
          "SNF oracle agreement " + std::to_string(snf_ok) + "/1000");

  // plain-word sweep: stream floor(4^12) words of length 40 per seed
  MeasureSpec spec(MeasureKind::Plain, 2, 40);
  const std::uint64_t n_words = density_count(density_base(spec), 0.3, 40, 20000000);
  int good = 0;
  Json factor_hist = Json::array();
  for (int seed = 0; seed < 100; ++seed) {
    RngStream rng(master, 1000 + seed);
    AbelianAccumulator acc(spec.alphabet);
    for (std::uint64_t i = 0; i < n_words; ++i) acc.add(sample_word(spec, rng));
    const auto factors = acc.invariant_factors();
    bool ok = true;
    Json fs = Json::array();
    for (const auto& f : factors) {
      ok = ok && (f == 1 || f == 2);
      fs.push_back(f.str());
    }
    good += ok ? 1 : 0;
    factor_hist.push_back(std::move(fs));
  }
  require(r, good >= 90,
          "invariant factors in {1,2} for only " + std::to_string(good) + "/100");
  emit(r, "acceptance-7", master,
       Json{{"snf_oracle_ok", snf_ok},
            {"n_words", n_words},
            {"good_seeds", good},
            {"factors", std::move(factor_hist)}});
  return r;
}

// ---------------------------------------------------------------------- 8

// Brute fulfilling count by direct tuple enumeration.
BigInt brute_fulfill(const Davkd& d, int m) {
  std::vector<Word> words;
  {
    Word w(d.ell);
    std::function<void(int)> rec = [&](int pos) {
      if (pos == d.ell) {
        words.push_back(w);
        return;
      }
      for (Letter x = 0; x < 2 * m; ++x) {
        if (pos > 0 && x == Alphabet::inv(w[pos - 1])) continue;
        w[pos] = x;
        rec(pos + 1);
      }
    };
    rec(0);
  }
  const int labels = d.n_labels();
  std::vector<Word> tuple(labels);
  BigInt count = 0;
  std::function<void(int)> rec = [&](int idx) {
    if (idx == labels) {
      if (fulfill_check(d, tuple)) ++count;
      return;
    }
    for (const Word& w : words) {
      tuple[idx] = w;
      rec(idx + 1);
    }
  };
  rec(0);
  return count;
}

Result criterion_8() {
  Result r;
  const std::vector<BigRat> densities{BigRat(0), BigRat(1, 4), BigRat(1, 2)};
  Json per_ell = Json::array();
  std::uint64_t brute_checked = 0, brute_ok = 0;
  for (int K : {1, 2}) {
    for (int ell = 3; ell <= 12; ++ell) {
      std::uint64_t count = 0, boundary_bad = 0, lemma_bad = 0;
      enumerate_davkd(K, ell, [&](const Davkd& d) {
        ++count;
        const GammaGraph gamma = build_gamma(d);
        if (d.boundary_length() + 2 * static_cast<int>(gamma.edges.size()) !=
            d.n_faces() * d.ell)
          ++boundary_bad;
        for (const auto& dens : densities)
          if (!iso_check(d, dens).lemma_satisfied) ++lemma_bad;
        // exhaustive cross-check of the fulfilling count where the tuple
        // space is enumerable; deterministic thinning where it is not
        // (n_faces * ell <= 12 spans ~1e10 tuple checks otherwise).
        const bool eligible = d.n_faces() * ell <= 12;
        const std::uint64_t stride =
            K == 1 ? (ell <= 10 ? 1 : (ell == 11 ? 5 : 11))
                   : (ell == 3 ? 1 : (ell == 4 ? 3 : (ell == 5 ? 37 : 499)));
        if (eligible && count % stride == 0) {
          ++brute_checked;
          if (count_fulfilling_reduced(d, 2).count == brute_fulfill(d, 2))
            ++brute_ok;
        }
      });
      require(r, boundary_bad == 0,
              "boundary identity failed at K=" + std::to_string(K) +
                  " ell=" + std::to_string(ell));
      require(r, lemma_bad == 0,
              "lemma failed at K=" + std::to_string(K) +
                  " ell=" + std::to_string(ell));
      if (K == 2) {
        // count(ell) <= C ell^8 with C frozen from the observed range
        const double ratio = static_cast<double>(count) / std::pow(ell, 8);
        require(r, ratio <= 0.2,
                "K=2 count/ell^8 = " + fmt(ratio) + " at ell=" + std::to_string(ell));
      }
      per_ell.push_back(Json{{"K", K}, {"ell", ell}, {"count", count}});
    }
  }
  require(r, brute_checked > 0 && brute_ok == brute_checked,
          "fulfill brute force agreed on " + std::to_string(brute_ok) + "/" +
              std::to_string(brute_checked));
  emit(r, "acceptance-8", 0,
       Json{{"counts", std::move(per_ell)},
            {"brute_checked", brute_checked},
            {"brute_ok", brute_ok}});
  return r;
}

// ---------------------------------------------------------------------- 9

Result criterion_9() {
  Result r;
  const int ell = 2000;
  const NormDistribution nd = norm_distribution_exact_free(2, ell);
  require(r, nd.speed >= 0.49 && nd.speed <= 0.51, "speed " + fmt(nd.speed));

  const double theta = theta_free_closed(2);
  const double log4 = std::log(4.0);
  Json grid = Json::array();
  double max_slack = -1e300;
  for (int i = 1; i <= 9; ++i) {
    const int lp = ell * i / 10;
    double p = 0.0;
    for (int s = 0; s <= lp; ++s) p += nd.p[s];
    const double log_p = std::log(p) / log4;
    const double exponent =
        -(1.0 - theta) * (ell - theta / (1.0 - theta) * lp);
    // slack in base-2m log units; "roughly less than" allows a
    // subexponential factor, measured here and frozen from pilot runs
    const double slack = log_p - exponent;
    max_slack = std::max(max_slack, slack);
    grid.push_back(Json{{"lp", lp}, {"log4_p", log_p}, {"bound", exponent},
                        {"slack", slack}});
    require(r, std::isfinite(log_p), "underflow at lp=" + std::to_string(lp));
  }
  // polynomial slack: at most c log_4(ell) with c frozen at 3
  require(r, max_slack <= 3.0 * std::log(static_cast<double>(ell)) / log4,
          "slack " + fmt(max_slack) + " beyond 3 log4(ell)");
  emit(r, "acceptance-9", 0,
       Json{{"mean", nd.mean},
            {"speed", nd.speed},
            {"max_slack", max_slack},
            {"grid", std::move(grid)}});
  return r;
}

// ---------------------------------------------------------------------- 10

using Generator = Result (*)();
constexpr Generator kGenerators[] = {criterion_1, criterion_2, criterion_3,
                                     criterion_4, criterion_5, criterion_6,
                                     criterion_7, criterion_8, criterion_9};

std::string artifact_path(int n) {
  return "acceptance_out/criterion_" + std::to_string(n) + ".jsonl";
}

Result criterion_10() {
  Result r;
  for (int n = 1; n <= 9; ++n) {
    std::string reference;
    std::ifstream f(artifact_path(n), std::ios::binary);
    if (f) {
      std::stringstream buf;
      buf << f.rdbuf();
      reference = buf.str();
    } else {
      // artifact missing (criterion not run yet): generate it in-process
      reference = kGenerators[n - 1]().jsonl;
    }
    const Result rerun = kGenerators[n - 1]();
    require(r, rerun.jsonl == reference,
            "criterion " + std::to_string(n) + " is not byte-identical on re-run");
  }
  r.jsonl = "";  // nothing of its own to persist
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <criterion 1..10>\n";
    return 2;
  }
  const int n = std::atoi(argv[1]);
  if (n < 1 || n > 10) {
    std::cerr << "criterion out of range\n";
    return 2;
  }
  static const char* kNames[] = {
      "appendix numerics (closed forms)",
      "spectral consistency triangle",
      "exact dp vs enumeration and the F8xZ/2 chain",
      "ball power-iteration lower bounds",
      "phase transition sweep (reduced words)",
      "small cancellation thresholds",
      "abelianization / smith normal form",
      "diagram combinatorics (K <= 2)",
      "escape speed and the norm tail bound",
      "byte-identical reproducibility",
  };
  Result res;
  try {
    res = n == 10 ? criterion_10() : kGenerators[n - 1]();
  } catch (const std::exception& e) {
    std::cout << "criterion " << n << " (" << kNames[n - 1]
              << "): FAIL - exception: " << e.what() << "\n";
    return 1;
  }
  if (n != 10 && !res.jsonl.empty()) {
    std::filesystem::create_directories("acceptance_out");
    std::ofstream f(artifact_path(n), std::ios::binary);
    f << res.jsonl;
  }
  std::cout << "criterion " << n << " (" << kNames[n - 1] << "): "
            << (res.pass ? "PASS" : "FAIL")
            << (res.detail.empty() ? "" : " - " + res.detail) << "\n";
  return res.pass ? 0 : 1;
}
