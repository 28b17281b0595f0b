#include "rq/measure.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rq/errors.hpp"

namespace rq {

using json = nlohmann::ordered_json;

std::string measure_name(MeasureKind k) {
  switch (k) {
    case MeasureKind::Plain:
      return "plain";
    case MeasureKind::Reduced:
      return "reduced";
    case MeasureKind::CyclicallyReduced:
      return "cyclic";
    case MeasureKind::Geodesic:
      return "geodesic";
  }
  return "?";
}

MeasureKind measure_from_name(const std::string& name) {
  if (name == "plain") return MeasureKind::Plain;
  if (name == "reduced") return MeasureKind::Reduced;
  if (name == "cyclic") return MeasureKind::CyclicallyReduced;
  if (name == "geodesic") return MeasureKind::Geodesic;
  throw input_error("unknown measure '" + name + "'");
}

MeasureSpec::MeasureSpec(MeasureKind k, int m_, int ell_, int L_)
    : kind(k), m(m_), ell(ell_), L(L_), alphabet(m_) {
  validate();
}

void MeasureSpec::validate() const {
  if (ell < 1) throw input_error("measure: ell must be >= 1");
  if (m < 1) throw input_error("measure: m must be >= 1");
  if (kind == MeasureKind::Reduced || kind == MeasureKind::CyclicallyReduced) {
    if (2 * m < 2) throw input_error("measure: reduced kinds need 2m >= 2");
  }
  if (kind != MeasureKind::Geodesic && L != 0)
    throw input_error("measure: L only applies to the geodesic measure");
  if (L < 0) throw input_error("measure: negative annulus halfwidth");
}

void MeasureSpec::attach_ball(std::shared_ptr<const CayleyBall> b) {
  if (kind != MeasureKind::Geodesic)
    throw input_error("attach_ball: only the geodesic measure uses a ball");
  if (b->radius() < ell + L)
    throw capacity_error("geodesic measure: ball radius " +
                         std::to_string(b->radius()) + " < ell+L = " +
                         std::to_string(ell + L));
  ball = std::move(b);
  slice = std::make_shared<const std::vector<Word>>(ball->sphere_slice(ell, L));
  alphabet = ball->model().alphabet();
}

std::string MeasureSpec::json_header(double density, std::uint64_t seed,
                                     std::uint64_t count) const {
  json j;
  j["measure"] = measure_name(kind);
  j["m"] = m;
  j["ell"] = ell;
  if (kind == MeasureKind::Geodesic) j["L"] = L;
  j["density"] = density;
  j["count"] = count;
  j["seed"] = seed;
  return j.dump();
}

BigInt count_words(MeasureKind kind, int m, int ell) {
  if (ell < 1) throw input_error("count_words: ell must be >= 1");
  const int a = 2 * m;
  switch (kind) {
    case MeasureKind::Plain:
      return boost::multiprecision::pow(BigInt(a), ell);
    case MeasureKind::Reduced:
      return BigInt(a) * boost::multiprecision::pow(BigInt(a - 1), ell - 1);
    case MeasureKind::CyclicallyReduced: {
      if (ell == 1) return a;
      // trace of M^ell, M[i][j] = [j != inv(i)]: closed non-cancelling walks.
      std::vector<BigInt> M(static_cast<std::size_t>(a) * a), R(M.size());
      for (int i = 0; i < a; ++i)
        for (int j = 0; j < a; ++j) M[i * a + j] = (j != (i ^ 1)) ? 1 : 0;
      // R = identity
      for (int i = 0; i < a; ++i) R[i * a + i] = 1;
      auto matmul = [a](const std::vector<BigInt>& X, const std::vector<BigInt>& Y) {
        std::vector<BigInt> Z(static_cast<std::size_t>(a) * a);
        for (int i = 0; i < a; ++i)
          for (int k = 0; k < a; ++k) {
            if (X[i * a + k] == 0) continue;
            for (int j = 0; j < a; ++j) Z[i * a + j] += X[i * a + k] * Y[k * a + j];
          }
        return Z;
      };
      int e = ell;
      while (e > 0) {
        if (e & 1) R = matmul(R, M);
        M = matmul(M, M);
        e >>= 1;
      }
      BigInt tr = 0;
      for (int i = 0; i < a; ++i) tr += R[i * a + i];
      return tr;
    }
    case MeasureKind::Geodesic:
      throw input_error("count_words: geodesic counts need an attached ball");
  }
  throw numeric_error("count_words: unreachable");
}

BigInt count_words(const MeasureSpec& spec) {
  if (spec.kind == MeasureKind::Geodesic) {
    if (!spec.slice) throw input_error("count_words: geodesic spec has no ball");
    return BigInt(spec.slice->size());
  }
  return count_words(spec.kind, spec.m, spec.ell);
}

BigInt density_base(const MeasureSpec& spec) {
  switch (spec.kind) {
    case MeasureKind::Plain:
      return boost::multiprecision::pow(BigInt(2 * spec.m), spec.ell);
    case MeasureKind::Reduced:
    case MeasureKind::CyclicallyReduced:
      return boost::multiprecision::pow(BigInt(2 * spec.m - 1), spec.ell);
    case MeasureKind::Geodesic:
      return count_words(spec);
  }
  throw numeric_error("density_base: unreachable");
}

std::uint64_t density_count(const BigInt& base, double d, int ell,
                            std::uint64_t budget) {
  if (d < 0.0 || d > 1.0) throw input_error("density_count: d outside [0,1]");
  if (base < 1) throw input_error("density_count: empty base class");
  if (d == 0.0) return 1;  // density 0: subexponentially many relators

  const double logn = log_bigint(base);
  const double logv = d * logn;
  if (logv > std::log(static_cast<double>(budget)) + 1e-9) {
    std::ostringstream os;
    os << "density_count: floor(base^d) exceeds budget " << budget
       << " at ell=" << ell << "; max feasible d ~ "
       << std::log(static_cast<double>(budget)) / logn;
    throw capacity_error(os.str());
  }
  std::uint64_t n;
  if (base <= BigInt(1) << 52) {
    n = static_cast<std::uint64_t>(
        std::floor(std::pow(base.convert_to<double>(), static_cast<double>(d))));
  } else {
    n = static_cast<std::uint64_t>(std::floor(std::exp(logv)));
  }
  if (n < 1) n = 1;
  if (n > budget)
    throw capacity_error("density_count: count " + std::to_string(n) +
                         " exceeds budget " + std::to_string(budget));
  return n;
}

namespace {

void sample_reduced_into(Word& w, int a, int ell, RngStream& rng) {
  w.clear();
  Letter first = static_cast<Letter>(rng.bounded(static_cast<std::uint32_t>(a)));
  w.push_back(first);
  for (int i = 1; i < ell; ++i) {
    Letter banned = Alphabet::inv(w.back());
    Letter r = static_cast<Letter>(rng.bounded(static_cast<std::uint32_t>(a - 1)));
    w.push_back(r < banned ? r : static_cast<Letter>(r + 1));
  }
}

}  // namespace

Word sample_word(const MeasureSpec& spec, RngStream& rng) {
  spec.validate();
  const int a = 2 * spec.m;
  Word w;
  switch (spec.kind) {
    case MeasureKind::Plain:
      w.reserve(spec.ell);
      for (int i = 0; i < spec.ell; ++i)
        w.push_back(static_cast<Letter>(rng.bounded(static_cast<std::uint32_t>(a))));
      return w;
    case MeasureKind::Reduced:
      sample_reduced_into(w, a, spec.ell, rng);
      return w;
    case MeasureKind::CyclicallyReduced:
      // Exact: rejection from the reduced measure.  Expected acceptance is
      // (2m-2)/(2m-1) + O((2m-1)^-ell), so about one extra draw overall.
      for (;;) {
        sample_reduced_into(w, a, spec.ell, rng);
        if (spec.ell == 1 || w.back() != Alphabet::inv(w.front())) return w;
      }
    case MeasureKind::Geodesic: {
      if (!spec.slice)
        throw input_error("sample_word: geodesic measure has no attached ball");
      if (spec.slice->empty())
        throw input_error("sample_word: empty geodesic annulus");
      return (*spec.slice)[rng.bounded(static_cast<std::uint32_t>(spec.slice->size()))];
    }
  }
  throw numeric_error("sample_word: unreachable");
}

RelatorSet sample_relator_set(const MeasureSpec& spec, double d, RngStream& rng,
                              std::uint64_t seed_echo,
                              std::optional<std::uint64_t> count_override,
                              std::uint64_t budget) {
  spec.validate();
  std::uint64_t n = count_override ? *count_override
                                   : density_count(density_base(spec), d, spec.ell, budget);
  if (n > budget)
    throw capacity_error("sample_relator_set: override count exceeds budget");
  RelatorSet out(spec, d, seed_echo);
  out.reserve(n, static_cast<std::size_t>(spec.ell));
  for (std::uint64_t i = 0; i < n; ++i) {
    Word w = sample_word(spec, rng);
    out.push(std::span<const Letter>(w.data(), w.size()));
  }
  return out;
}

void RelatorSet::serialize(std::ostream& out) const {
  out << spec_.json_header(density_, seed_, size()) << "\n";
  for (std::size_t i = 0; i < size(); ++i) {
    auto v = word(i);
    out << spec_.alphabet.format(Word(v.begin(), v.end())) << "\n";
  }
}

RelatorSet RelatorSet::deserialize(std::istream& in) {
  std::string header;
  if (!std::getline(in, header))
    throw input_error("relator set: missing header line");
  json j;
  try {
    j = json::parse(header);
  } catch (const std::exception& e) {
    throw input_error(std::string("relator set: bad header: ") + e.what());
  }
  MeasureSpec spec(measure_from_name(j.at("measure").get<std::string>()),
                   j.at("m").get<int>(), j.at("ell").get<int>(),
                   j.value("L", 0));
  RelatorSet out(spec, j.value("density", 0.0), j.value("seed", 0ULL));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Word w = spec.alphabet.parse(line);
    out.push(std::span<const Letter>(w.data(), w.size()));
  }
  std::uint64_t declared = j.value("count", static_cast<std::uint64_t>(out.size()));
  if (declared != out.size())
    throw input_error("relator set: header count does not match word lines");
  return out;
}

}  // namespace rq
