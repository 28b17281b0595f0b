#include "rq/phase.hpp"

#include <sys/mman.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace rq {
namespace {

constexpr std::size_t kRegionBufCap = 4096;

LetterPair make_pair_sorted(Letter a, Letter b) {
  return a < b ? LetterPair{a, b} : LetterPair{b, a};
}

int uniform_length(const RelatorSet& rs, int minimum) {
  if (rs.size() == 0) return 0;
  const int ell = static_cast<int>(rs.word(0).size());
  for (std::size_t i = 1; i < rs.size(); ++i)
    if (static_cast<int>(rs.word(i).size()) != ell)
      throw input_error("relator set: words of unequal length");
  if (ell < minimum) throw input_error("relator set: words too short for scan");
  return ell;
}

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Trivial: return "trivial";
    case Verdict::Z2: return "z2";
    case Verdict::Inconclusive: return "inconclusive";
  }
  throw input_error("verdict_name: bad enum");
}

// ---------------------------------------------------------------------------
// Prefix collision scan

PrefixScanResult prefix_collision_scan(const RelatorSet& rs, std::size_t witness_cap) {
  PrefixScanResult out;
  const std::size_t n = rs.size();
  if (n < 2) return out;
  const int ell = uniform_length(rs, 2);
  const int letters = rs.spec().alphabet.size();
  int bits = 1;
  while ((1 << bits) < letters) ++bits;

  std::vector<bool> seen_pair(static_cast<std::size_t>(letters) * letters, false);
  auto note_pair = [&](Letter a, Letter b, std::uint64_t i, std::uint64_t j) {
    auto p = make_pair_sorted(a, b);
    std::size_t cell = static_cast<std::size_t>(p.first) * letters + p.second;
    if (!seen_pair[cell]) {
      seen_pair[cell] = true;
      out.identifications.push_back(p);
      if (out.witnesses.size() < witness_cap) out.witnesses.emplace_back(i, j);
    }
  };

  if (static_cast<long>(bits) * ell <= 64) {
    // Packed path: the whole word in one 64-bit key; prefix = key >> bits.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t k = 0;
      for (Letter x : rs.word(i)) k = (k << bits) | x;
      keys[i] = {k, i};
    }
    std::sort(keys.begin(), keys.end());
    const std::uint64_t last_mask = (1u << bits) - 1;
    std::vector<std::pair<Letter, std::uint64_t>> lasts;
    std::size_t run = 0;
    while (run < n) {
      std::size_t end = run + 1;
      const std::uint64_t prefix = keys[run].first >> bits;
      while (end < n && (keys[end].first >> bits) == prefix) ++end;
      const std::uint64_t k = end - run;
      out.collision_pairs += k * (k - 1) / 2;
      if (k > 1) {
        lasts.clear();  // sorted keys group equal last letters together
        for (std::size_t p = run; p < end; ++p) {
          Letter a = static_cast<Letter>(keys[p].first & last_mask);
          if (lasts.empty() || lasts.back().first != a)
            lasts.emplace_back(a, keys[p].second);
        }
        for (std::size_t p = 0; p < lasts.size(); ++p)
          for (std::size_t q = p + 1; q < lasts.size(); ++q)
            note_pair(lasts[p].first, lasts[q].first, lasts[p].second,
                      lasts[q].second);
      }
      run = end;
    }
    return out;
  }

  // Generic path: index sort by word content.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    auto wa = rs.word(a), wb = rs.word(b);
    return std::lexicographical_compare(wa.begin(), wa.end(), wb.begin(), wb.end());
  });
  std::size_t run = 0;
  auto prefix_eq = [&](std::uint32_t a, std::uint32_t b) {
    auto wa = rs.word(a), wb = rs.word(b);
    return std::equal(wa.begin(), wa.end() - 1, wb.begin());
  };
  std::vector<std::pair<Letter, std::uint64_t>> lasts;
  while (run < n) {
    std::size_t end = run + 1;
    while (end < n && prefix_eq(order[run], order[end])) ++end;
    const std::uint64_t k = end - run;
    out.collision_pairs += k * (k - 1) / 2;
    if (k > 1) {
      lasts.clear();
      for (std::size_t p = run; p < end; ++p)
        lasts.emplace_back(rs.word(order[p])[ell - 1], order[p]);
      std::sort(lasts.begin(), lasts.end());
      lasts.erase(std::unique(lasts.begin(), lasts.end(),
                              [](auto& a, auto& b) { return a.first == b.first; }),
                  lasts.end());
      for (std::size_t p = 0; p < lasts.size(); ++p)
        for (std::size_t q = p + 1; q < lasts.size(); ++q)
          note_pair(lasts[p].first, lasts[q].first, lasts[p].second,
                    lasts[q].second);
    }
    run = end;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Collapse verdict

CollapseReport letter_collapse_verdict(const std::vector<LetterPair>& identifications,
                                       const std::vector<int>& killed_generators,
                                       int m, bool all_lengths_even) {
  if (m < 1) throw input_error("letter_collapse_verdict: m < 1");
  const int letters = 2 * m;
  const int e_node = letters;
  Dsu dsu(letters + 1);
  auto inv_node = [&](int x) { return x < letters ? (x ^ 1) : x; };
  // Equivariant closure: x ~ y forces x^-1 ~ y^-1.
  std::vector<std::pair<int, int>> queue;
  auto push = [&](int a, int b) { queue.emplace_back(a, b); };
  for (auto [a, b] : identifications) {
    if (a >= letters || b >= letters)
      throw input_error("letter_collapse_verdict: letter out of range");
    push(a, b);
  }
  for (int g : killed_generators) {
    if (g < 0 || g >= m) throw input_error("letter_collapse_verdict: bad generator");
    push(2 * g, e_node);
  }
  while (!queue.empty()) {
    auto [a, b] = queue.back();
    queue.pop_back();
    if (dsu.unite(a, b)) push(inv_node(a), inv_node(b));
  }

  CollapseReport rep;
  rep.identifications = identifications;
  rep.killed_generators = killed_generators;
  rep.all_lengths_even = all_lengths_even;

  std::unordered_set<int> roots;
  for (int x = 0; x < letters; ++x) roots.insert(dsu.find(x));
  rep.letter_classes = static_cast<int>(roots.size());
  const bool one_class = rep.letter_classes == 1;
  const bool killed_something = !killed_generators.empty();
  bool all_dead = killed_something;
  for (int x = 0; x < letters && all_dead; ++x)
    all_dead = dsu.find(x) == dsu.find(e_node);

  if (all_dead || (one_class && (killed_something || !all_lengths_even)))
    rep.verdict = Verdict::Trivial;
  else if (one_class && all_lengths_even)
    rep.verdict = Verdict::Z2;
  else
    rep.verdict = Verdict::Inconclusive;
  return rep;
}

PrefixScanResult plain_word_collapse_scan(const GroupModel& model,
                                          const RelatorSet& rs,
                                          std::size_t witness_cap) {
  PrefixScanResult out;
  const int letters = model.alphabet().size();
  std::vector<bool> seen_pair(static_cast<std::size_t>(letters) * letters, false);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    auto w = rs.word(i);
    if (w.size() < 2) continue;
    Word prefix(w.begin(), w.end() - 2);
    if (!model.is_identity(prefix)) continue;
    ++out.collision_pairs;  // scan hits: relators of the form w a b, w = e
    Letter a = w[w.size() - 2];
    Letter b_inv = Alphabet::inv(w[w.size() - 1]);
    if (a == b_inv) continue;  // ab = e already holds in the base model
    auto p = make_pair_sorted(a, b_inv);
    std::size_t cell = static_cast<std::size_t>(p.first) * letters + p.second;
    if (!seen_pair[cell]) {
      seen_pair[cell] = true;
      out.identifications.push_back(p);
      if (out.witnesses.size() < witness_cap) out.witnesses.emplace_back(i, i);
    }
  }
  return out;
}

GeodesicScanResult geodesic_collapse_scan(const RelatorSet& rs, const CayleyBall& ball) {
  GeodesicScanResult out;
  const GroupModel& model = ball.model();
  const int letters = ball.letters();
  std::vector<std::int32_t> ids(rs.size());
  std::unordered_map<std::int32_t, std::uint64_t> first_index;
  first_index.reserve(rs.size() * 2);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    Word canon = model.normal_form(rs.word_copy(i));
    std::int32_t id = ball.find(canon);
    if (id < 0)
      throw capacity_error("geodesic_collapse_scan: relator outside the ball");
    ids[i] = id;
    first_index.emplace(id, i);
  }
  std::vector<bool> killed(model.alphabet().generators(), false);
  for (Letter x = 0; x < letters; ++x) {
    const int g = Alphabet::generator_of(x);
    if (killed[g]) continue;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::int32_t n = ball.neighbor(ids[i], x);
      if (n == CayleyBall::kNoEdge || n == ids[i]) continue;
      auto it = first_index.find(n);
      if (it == first_index.end()) continue;
      killed[g] = true;  // x a = y with x, y both relators: a dies
      out.witnesses.emplace_back(i, it->second);
      break;
    }
  }
  for (int g = 0; g < static_cast<int>(killed.size()); ++g)
    if (killed[g]) out.killed_generators.push_back(g);
  return out;
}

// ---------------------------------------------------------------------------
// Abelianization

namespace {

long long ext_gcd_ll(long long a, long long b, long long& x, long long& y) {
  if (b == 0) {
    x = (a < 0) ? -1 : 1;
    y = 0;
    return std::llabs(a);
  }
  long long x1, y1;
  long long g = ext_gcd_ll(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

long long mul_add_ll(long long a, long long b, long long c, long long d) {
  __int128 r = static_cast<__int128>(a) * b + static_cast<__int128>(c) * d;
  if (r > std::numeric_limits<long long>::max() ||
      r < std::numeric_limits<long long>::min())
    throw numeric_error("exponent lattice: entry overflow");
  return static_cast<long long>(r);
}

}  // namespace

AbelianAccumulator::AbelianAccumulator(const Alphabet& alphabet)
    : alphabet_(alphabet), basis_(alphabet.generators()) {
  // u^2 = e for element involutions: fold the congruence column up front.
  const int m = alphabet_.generators();
  for (int g = 0; g < m; ++g)
    if (alphabet_.element_involution(g)) {
      std::vector<long long> v(m, 0);
      v[g] = 2;
      fold(std::move(v));
    }
}

void AbelianAccumulator::add(std::span<const Letter> word) {
  std::vector<long long> v(basis_.size(), 0);
  for (Letter x : word)
    v[Alphabet::generator_of(x)] += Alphabet::is_inverse_slot(x) ? -1 : 1;
  fold(std::move(v));
}

void AbelianAccumulator::fold(std::vector<long long> v) {
  const int m = static_cast<int>(basis_.size());
  // Keep entries of earlier columns reduced modulo the later pivots.
  auto reduce_column = [&](int i) {
    for (int k = i + 1; k < m; ++k) {
      if (basis_[k].empty()) continue;
      long long p = basis_[k][k];
      long long q = basis_[i][k] / p;
      if (basis_[i][k] - q * p < 0) --q;
      if (q == 0) continue;
      for (int r = k; r < m; ++r)
        basis_[i][r] = mul_add_ll(1, basis_[i][r], -q, basis_[k][r]);
    }
    for (int j = 0; j < i; ++j) {
      if (basis_[j].empty()) continue;
      long long p = basis_[i][i];
      long long q = basis_[j][i] / p;
      if (basis_[j][i] - q * p < 0) --q;
      if (q == 0) continue;
      for (int r = i; r < m; ++r)
        basis_[j][r] = mul_add_ll(1, basis_[j][r], -q, basis_[i][r]);
    }
  };
  for (int i = 0; i < m; ++i) {
    if (v[i] == 0) continue;
    if (basis_[i].empty()) {
      if (v[i] < 0)
        for (auto& x : v) x = -x;
      basis_[i] = std::move(v);
      reduce_column(i);
      return;
    }
    long long a = basis_[i][i], b = v[i], x, y;
    long long g = ext_gcd_ll(a, b, x, y);
    std::vector<long long> combined(m);
    for (int r = i; r < m; ++r) {
      combined[r] = mul_add_ll(x, basis_[i][r], y, v[r]);
      v[r] = mul_add_ll(a / g, v[r], -(b / g), basis_[i][r]);
    }
    basis_[i] = std::move(combined);
    reduce_column(i);
  }
}

std::vector<BigInt> AbelianAccumulator::invariant_factors() const {
  const int m = static_cast<int>(basis_.size());
  std::vector<std::vector<BigInt>> a(m, std::vector<BigInt>(m, 0));
  for (int j = 0; j < m; ++j)
    if (!basis_[j].empty())
      for (int r = 0; r < m; ++r) a[r][j] = basis_[j][r];
  return smith_invariant_factors(a);
}

std::vector<BigInt> abelianization(const RelatorSet& rs) {
  AbelianAccumulator acc(rs.spec().alphabet);
  for (std::size_t i = 0; i < rs.size(); ++i) acc.add(rs.word(i));
  return acc.invariant_factors();
}

std::vector<BigInt> smith_invariant_factors(std::vector<std::vector<BigInt>> a) {
  const int rows = static_cast<int>(a.size());
  const int cols = rows ? static_cast<int>(a[0].size()) : 0;
  for (const auto& row : a)
    if (static_cast<int>(row.size()) != cols)
      throw input_error("smith_invariant_factors: ragged matrix");
  const int dim = std::min(rows, cols);
  std::vector<BigInt> factors;

  for (int t = 0; t < dim; ++t) {
    // Move a minimal-magnitude nonzero entry to the pivot position.
    int pi = -1, pj = -1;
    for (int i = t; i < rows; ++i)
      for (int j = t; j < cols; ++j)
        if (a[i][j] != 0 &&
            (pi < 0 || abs(a[i][j]) < abs(a[pi][pj]))) {
          pi = i;
          pj = j;
        }
    if (pi < 0) break;
    std::swap(a[t], a[pi]);
    for (int i = 0; i < rows; ++i) std::swap(a[i][t], a[i][pj]);

    bool again = true;
    while (again) {
      again = false;
      for (int i = t + 1; i < rows; ++i) {
        if (a[i][t] == 0) continue;
        BigInt q = a[i][t] / a[t][t];
        for (int j = t; j < cols; ++j) a[i][j] -= q * a[t][j];
        if (a[i][t] != 0) {
          std::swap(a[t], a[i]);
          again = true;
        }
      }
      for (int j = t + 1; j < cols; ++j) {
        if (a[t][j] == 0) continue;
        BigInt q = a[t][j] / a[t][t];
        for (int i = t; i < rows; ++i) a[i][j] -= q * a[i][t];
        if (a[t][j] != 0) {
          for (int i = t; i < rows; ++i) std::swap(a[i][t], a[i][j]);
          again = true;
        }
      }
      if (!again) {
        // Divisibility repair: fold an offending row into the pivot row.
        for (int i = t + 1; i < rows && !again; ++i)
          for (int j = t + 1; j < cols && !again; ++j)
            if (a[i][j] % a[t][t] != 0) {
              for (int jj = t; jj < cols; ++jj) a[t][jj] += a[i][jj];
              again = true;
            }
      }
    }
    if (a[t][t] < 0) a[t][t] = -a[t][t];
    factors.push_back(a[t][t]);
  }
  factors.resize(dim, BigInt(0));
  return factors;
}

// ---------------------------------------------------------------------------
// Small cancellation

namespace {

constexpr std::uint64_t kHashMul = 0x9e3779b97f4a7c15ULL;

struct Strand {
  std::uint64_t word;
  bool inverted;
  const Word letters;
};

std::vector<Strand> build_strands(const RelatorSet& rs) {
  std::vector<Strand> strands;
  strands.reserve(rs.size() * 2);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    Word w = rs.word_copy(i);
    if (!is_cyclically_reduced(w))
      throw input_error("small_cancellation_check: relator not cyclically reduced");
    Word inv = inverse_word(w);
    strands.push_back({i, false, std::move(w)});
    strands.push_back({i, true, std::move(inv)});
  }
  return strands;
}

Letter at_cyclic(const Word& w, long pos) {
  long n = static_cast<long>(w.size());
  return w[static_cast<std::size_t>(((pos % n) + n) % n)];
}

bool occurrences_distinct(const std::vector<Strand>& strands, std::size_t sa, long pa,
                          std::size_t sb, long pb) {
  return !(strands[sa].word == strands[sb].word &&
           strands[sa].inverted == strands[sb].inverted && pa == pb);
}

// Exact existence of a shared t-window at distinct occurrences.
bool shared_window(const std::vector<Strand>& strands, int ell, int t,
                   PieceWitness* witness) {
  struct Occ {
    std::uint32_t strand;
    std::uint32_t shift;
  };
  std::unordered_map<std::uint64_t, std::vector<Occ>> table;
  table.reserve(strands.size() * ell * 2);
  std::uint64_t rk = 1;
  for (int i = 0; i < t - 1; ++i) rk *= kHashMul;
  auto letters_equal = [&](const Occ& a, const Occ& b) {
    for (int i = 0; i < t; ++i)
      if (at_cyclic(strands[a.strand].letters, a.shift + i) !=
          at_cyclic(strands[b.strand].letters, b.shift + i))
        return false;
    return true;
  };
  for (std::uint32_t s = 0; s < strands.size(); ++s) {
    const Word& w = strands[s].letters;
    std::uint64_t h = 0;
    for (int i = 0; i < t; ++i) h = h * kHashMul + at_cyclic(w, i) + 1;
    for (int start = 0; start < ell; ++start) {
      Occ cur{s, static_cast<std::uint32_t>(start)};
      auto& bucket = table[h];
      for (const Occ& prev : bucket)
        if (letters_equal(prev, cur) &&
            occurrences_distinct(strands, prev.strand, prev.shift, cur.strand,
                                 cur.shift)) {
          if (witness) {
            witness->word_a = strands[prev.strand].word;
            witness->inv_a = strands[prev.strand].inverted;
            witness->shift_a = static_cast<int>(prev.shift);
            witness->word_b = strands[cur.strand].word;
            witness->inv_b = strands[cur.strand].inverted;
            witness->shift_b = start;
            witness->length = t;
          }
          return true;
        }
      bucket.push_back(cur);
      h = (h - (at_cyclic(w, start) + 1) * rk) * kHashMul + at_cyclic(w, start + t) + 1;
    }
  }
  return false;
}

// Cyclic letter access on a flat strand stored at `base` with period `n`,
// valid for pos in [-n, 2n) — every index the probe extension can form.
Letter at_cyclic_flat(const Letter* base, int n, long pos) {
  if (pos < 0) pos += n;
  else if (pos >= n) pos -= n;
  return base[pos];
}

}  // namespace

// ---- PieceThresholdScanner (winnowing threshold pass) ----------------------
//
// Any shared window of length >= t is witnessed by a shared selected k-gram:
// within each window of w = t-k+1 consecutive k-gram positions the rightmost
// minimal fingerprint is selected, so two strands sharing a t-window select
// the same k-gram of it.  One open-addressing table over selected
// fingerprints therefore decides the threshold exactly.

PieceThresholdScanner::PieceThresholdScanner(int ell, int threshold,
                                             std::uint64_t max_words)
    : ell_(ell), t_(threshold), max_words_(max_words) {
  if (ell < 1) throw input_error("PieceThresholdScanner: ell must be >= 1");
  if (threshold < 1 || threshold > ell)
    throw input_error("PieceThresholdScanner: threshold out of range");
  if (ell > 0xffff) throw capacity_error("PieceThresholdScanner: ell too large");
  if (2 * max_words >= (std::uint64_t{1} << 22))
    throw capacity_error("PieceThresholdScanner: too many words");
  k_ = std::min(20, t_);
  w_ = t_ - k_ + 1;
  for (int i = 0; i < k_ - 1; ++i) rk_ *= kHashMul;

  std::uint64_t expected =
      2 * max_words * static_cast<std::uint64_t>(ell) * 2 / (w_ + 2) + 1024;
  std::size_t table_bits = 10;
  while ((std::size_t{1} << table_bits) < expected + expected / 3) ++table_bits;
  if (table_bits > 27)
    throw capacity_error("PieceThresholdScanner: fingerprint table too large");
  mask_ = (std::size_t{1} << table_bits) - 1;
  table_bytes_ = (mask_ + 1) * sizeof(std::uint64_t);
  void* map = mmap(nullptr, table_bytes_, PROT_READ | PROT_WRITE,
                   MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
  if (map == MAP_FAILED)
    throw capacity_error("PieceThresholdScanner: fingerprint table allocation failed");
  madvise(map, table_bytes_, MADV_HUGEPAGE);
  table_ = static_cast<std::uint64_t*>(map);
  // Fault the mapping in eagerly: sequential first touch assembles huge
  // pages cheaply, while on-demand faults during random probing stall on
  // synchronous compaction.
  std::memset(table_, 0, table_bytes_);
  if (table_bits >= 24) {
    region_shift_ = 17;  // 2^17 slots = 1 MB per region
    n_regions_ = std::size_t{1} << (table_bits - region_shift_);
    buf_ent_.resize(2 * n_regions_ * kRegionBufCap);
    buf_n_.assign(n_regions_, 0);
  }
  fps_.resize(static_cast<std::size_t>(ell_) + w_ - 1);
  buf_.resize(static_cast<std::size_t>(ell_) + k_);
  letters_.reserve(2 * max_words * static_cast<std::size_t>(ell_));
}

PieceThresholdScanner::~PieceThresholdScanner() {
  if (table_) munmap(table_, table_bytes_);
}

bool PieceThresholdScanner::add(std::span<const Letter> word) {
  if (found_) return true;
  if (static_cast<int>(word.size()) != ell_)
    throw input_error("PieceThresholdScanner: word length mismatch");
  if (n_words_ == max_words_)
    throw capacity_error("PieceThresholdScanner: word budget exhausted");
  const std::uint32_t s = static_cast<std::uint32_t>(2 * n_words_);
  const std::size_t old = letters_.size();
  letters_.resize(old + 2 * static_cast<std::size_t>(ell_));
  Letter* fwd = letters_.data() + old;
  Letter* bwd = fwd + ell_;
  for (int i = 0; i < ell_; ++i) {
    fwd[i] = word[static_cast<std::size_t>(i)];
    bwd[ell_ - 1 - i] = Alphabet::inv(fwd[i]);
  }
  for (int i = 0; i + 1 < ell_; ++i)
    if (fwd[i + 1] == Alphabet::inv(fwd[i]))
      throw input_error("PieceThresholdScanner: word not cyclically reduced");
  if (fwd[0] == Alphabet::inv(fwd[ell_ - 1]) && ell_ > 1)
    throw input_error("PieceThresholdScanner: word not cyclically reduced");
  ++n_words_;
  scan_strand(s);
  if (!found_) scan_strand(s + 1);
  return found_;
}

void PieceThresholdScanner::scan_strand(std::uint32_t strand) {
  const Letter* base = letters_.data() + static_cast<std::size_t>(strand) * ell_;
  std::copy(base, base + ell_, buf_.begin());
  for (int i = 0; i < k_; ++i) buf_[static_cast<std::size_t>(ell_) + i] = base[i % ell_];

  // fps_ holds the k-gram fingerprint at every start, duplicated past ell so
  // the cyclic window scan below never reduces an index mod ell.
  std::uint64_t h = 0;
  for (int i = 0; i < k_; ++i) h = h * kHashMul + buf_[i] + 1;
  for (int start = 0; start < ell_; ++start) {
    fps_[start] = h;
    h = (h - (buf_[start] + 1) * rk_) * kHashMul +
        buf_[static_cast<std::size_t>(start) + k_] + 1;
  }
  for (int i = 0; i < w_ - 1; ++i) fps_[static_cast<std::size_t>(ell_) + i] = fps_[i];

  // Rightmost minimum over each cyclic window of w k-gram positions.  The
  // window minima are non-decreasing in j, so consecutive duplicates are the
  // only ones to drop.
  dq_.clear();
  early_.clear();
  sels_.clear();
  std::size_t head = 0;
  std::int32_t last_selected = -1;
  for (int j = 0; j < ell_ + w_ - 1; ++j) {
    const std::uint64_t fj = fps_[j];
    while (dq_.size() > head && fps_[dq_.back()] >= fj) dq_.pop_back();
    dq_.push_back(j);
    if (j < w_ - 1) continue;
    while (dq_[head] <= j - w_) ++head;
    if (dq_[head] != last_selected) {
      last_selected = dq_[head];
      int sel = last_selected;
      if (sel < ell_) {
        // Positions below w-1 can reappear as minima past the cyclic wrap;
        // remember them so the repeat is not probed as a fresh occurrence.
        if (sel < w_ - 1) early_.push_back(sel);
      } else {
        sel -= ell_;
        if (std::find(early_.begin(), early_.end(), sel) != early_.end())
          continue;
      }
      sels_.push_back(sel);
    }
  }
  if (region_shift_ != 0) {
    for (std::int32_t sel : sels_) enqueue(strand, sel, fps_[sel]);
    return;
  }
  // Batch the table lookups: issuing all prefetches first overlaps the cache
  // misses that otherwise dominate the scan.
  for (std::int32_t sel : sels_)
    __builtin_prefetch(&table_[(fps_[sel] * kHashMul) & mask_]);
  for (std::int32_t sel : sels_) {
    probe(strand, sel, fps_[sel]);
    if (found_) return;
  }
}

void PieceThresholdScanner::enqueue(std::uint32_t strand, int pos, std::uint64_t fp) {
  const std::size_t region = ((fp * kHashMul) & mask_) >> region_shift_;
  const std::size_t at = 2 * (region * kRegionBufCap + buf_n_[region]);
  buf_ent_[at] = fp;
  buf_ent_[at + 1] = (static_cast<std::uint64_t>(strand) << 16) |
                     static_cast<std::uint64_t>(pos);
  if (++buf_n_[region] == kRegionBufCap) flush_region(region);
}

void PieceThresholdScanner::flush_region(std::size_t region) {
  const std::size_t begin = 2 * region * kRegionBufCap;
  const std::size_t n = buf_n_[region];
  buf_n_[region] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 16 < n)
      __builtin_prefetch(
          &table_[(buf_ent_[begin + 2 * (i + 16)] * kHashMul) & mask_]);
    const std::uint64_t fp = buf_ent_[begin + 2 * i];
    const std::uint64_t occ = buf_ent_[begin + 2 * i + 1];
    probe(static_cast<std::uint32_t>(occ >> 16),
          static_cast<int>(occ & 0xffff), fp);
    if (found_) return;
  }
}

bool PieceThresholdScanner::finish() {
  for (std::size_t r = 0; r < n_regions_ && !found_; ++r)
    if (buf_n_[r] > 0) flush_region(r);
  return found_;
}

void PieceThresholdScanner::reset() {
  std::memset(table_, 0, table_bytes_);
  std::fill(buf_n_.begin(), buf_n_.end(), 0u);
  letters_.clear();
  n_words_ = 0;
  fill_ = 0;
  found_ = false;
  witness_ = PieceWitness{};
}

void PieceThresholdScanner::probe(std::uint32_t strand, int pos, std::uint64_t fp) {
  const std::uint64_t tag = fp >> 38;
  const std::uint64_t packed = (tag << 38) |
                               (static_cast<std::uint64_t>(strand) << 16) |
                               static_cast<std::uint64_t>(pos);
  std::size_t slot = (fp * kHashMul) & mask_;
  while (true) {
    const std::uint64_t e = table_[slot];
    if (e == 0) {
      if (++fill_ * 10 > (mask_ + 1) * 9)
        throw capacity_error("PieceThresholdScanner: fingerprint table full");
      table_[slot] = packed + 1;
      return;
    }
    if (((e - 1) >> 38) == tag) {
      const std::uint32_t os = static_cast<std::uint32_t>(((e - 1) >> 16) & 0x3fffff);
      const long op = static_cast<long>((e - 1) & 0xffff);
      const Letter* other = letters_.data() + static_cast<std::size_t>(os) * ell_;
      const Letter* self = letters_.data() + static_cast<std::size_t>(strand) * ell_;
      bool equal = true;
      for (int i = 0; i < k_ && equal; ++i)
        equal = at_cyclic_flat(other, ell_, op + i) ==
                at_cyclic_flat(self, ell_, pos + i);
      if (equal) {
        // Extend the seed match cyclically in both directions, capped at ell.
        int left = 0, right = 0;
        while (k_ + left + right < ell_ &&
               at_cyclic_flat(other, ell_, op - left - 1) ==
                   at_cyclic_flat(self, ell_, pos - left - 1))
          ++left;
        while (k_ + left + right < ell_ &&
               at_cyclic_flat(other, ell_, op + k_ + right) ==
                   at_cyclic_flat(self, ell_, pos + k_ + right))
          ++right;
        const int len = k_ + left + right;
        const long start_a = ((op - left) % ell_ + ell_) % ell_;
        const long start_b = ((pos - left) % ell_ + ell_) % ell_;
        const bool distinct = !(os / 2 == strand / 2 && (os & 1) == (strand & 1) &&
                                start_a == start_b);
        if (len >= t_ && distinct) {
          witness_.word_a = os / 2;
          witness_.inv_a = (os & 1) != 0;
          witness_.shift_a = static_cast<int>(start_a);
          witness_.word_b = strand / 2;
          witness_.inv_b = (strand & 1) != 0;
          witness_.shift_b = static_cast<int>(start_b);
          witness_.length = len;
          found_ = true;
          return;
        }
      }
    }
    slot = (slot + 1) & mask_;
  }
}

SmallCancellationReport small_cancellation_check(const RelatorSet& rs,
                                                 bool threshold_only) {
  SmallCancellationReport rep;
  if (rs.size() == 0) {
    rep.satisfies = true;
    return rep;
  }
  rep.ell = uniform_length(rs, 1);
  const int ell = rep.ell;
  const int threshold = (ell + 5) / 6;  // violated iff max piece >= ceil(ell/6)
  if (threshold_only && threshold >= 2) {
    PieceThresholdScanner scanner(ell, threshold, rs.size());
    for (std::size_t i = 0; i < rs.size() && !scanner.found(); ++i)
      scanner.add(rs.word(i));
    scanner.finish();
    if (scanner.found()) {
      rep.max_piece = scanner.witness().length;
      rep.witness = scanner.witness();
      rep.satisfies = false;
    } else {
      rep.max_piece = threshold - 1;  // upper bound only
      rep.satisfies = true;
    }
    rep.max_piece_exact = false;
    rep.ratio = static_cast<double>(rep.max_piece) / ell;
    return rep;
  }

  auto strands = build_strands(rs);
  const std::uint64_t windows = 2ull * rs.size() * ell;
  if (windows > 60000000ull)
    throw capacity_error(
        "small_cancellation_check: too many windows for the exact scan; "
        "use threshold mode");

  int lo = 0, hi = ell;
  PieceWitness best{};
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    PieceWitness w;
    if (shared_window(strands, ell, mid, &w)) {
      lo = mid;
      best = w;
    } else {
      hi = mid - 1;
    }
  }
  rep.max_piece = lo;
  rep.max_piece_exact = true;
  if (lo > 0) rep.witness = best;
  rep.ratio = static_cast<double>(lo) / ell;
  rep.satisfies = 6 * lo < ell;
  return rep;
}

// ---------------------------------------------------------------------------
// Axiom probes

AxiomProbeReport axiom_probe(const GroupModel& model, MeasureKind kind, int axiom,
                             const std::vector<int>& grid, std::uint64_t trials,
                             double theta, RngStream& rng) {
  if (axiom != 2 && axiom != 3) throw input_error("axiom_probe: axiom must be 2 or 3");
  if (trials == 0) throw input_error("axiom_probe: zero trials");
  if (kind == MeasureKind::Geodesic)
    throw input_error("axiom_probe: geodesic measure not supported here");
  const int m = model.alphabet().generators();
  const double base = 2.0 * m;
  const double kappa = (1.0 - theta) / (2.0 * theta);

  AxiomProbeReport rep;
  rep.axiom = axiom;
  rep.grid = grid;
  rep.reference = (axiom == 3) ? 1.0 - theta : (1.0 - theta) - theta * kappa;

  std::vector<double> xs, ys;
  for (int len : grid) {
    MeasureSpec spec(kind, m, len, 0);
    spec.alphabet = model.alphabet();
    std::uint64_t hits = 0;
    for (std::uint64_t tr = 0; tr < trials; ++tr) {
      if (axiom == 3) {
        Word x = sample_word(spec, rng);
        Word y = sample_word(spec, rng);
        x.insert(x.end(), y.begin(), y.end());
        if (model.is_identity(x)) ++hits;
      } else {
        Word x = sample_word(spec, rng);
        if (model.norm(x) <= static_cast<long>(kappa * len)) ++hits;
      }
    }
    rep.hits.push_back(hits);
    rep.trials.push_back(trials);
    const double n = (axiom == 3) ? 2.0 * len : static_cast<double>(len);
    if (hits == 0) {
      rep.log_prob.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      double lp = std::log(static_cast<double>(hits) / trials) / std::log(base);
      rep.log_prob.push_back(lp);
      xs.push_back(n);
      ys.push_back(lp);
    }
  }

  rep.used_points = static_cast<int>(xs.size());
  if (rep.used_points >= 2) {
    const double n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom > 0) {
      const double slope = (n * sxy - sx * sy) / denom;
      rep.fitted_exponent = -slope;
      double rss = 0;
      const double intercept = (sy - slope * sx) / n;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        rss += r * r;
      }
      if (n > 2) rep.fit_stderr = std::sqrt(rss / (n - 2) / (sxx - sx * sx / n));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Phase sweep

std::vector<SweepRecord> phase_sweep(const SweepConfig& config) {
  if (config.ells.empty() || config.densities.empty())
    throw input_error("phase_sweep: empty grid");
  if (config.trials < 1) throw input_error("phase_sweep: trials < 1");
  const GroupModel model = GroupModel::parse(config.group_expr);
  const bool model_measure = config.measure == MeasureKind::Plain ||
                             config.measure == MeasureKind::Geodesic;
  if (model_measure && config.m != model.alphabet().generators())
    throw input_error("phase_sweep: m does not match the group alphabet");

  std::vector<SweepRecord> records;
  std::map<int, std::shared_ptr<const CayleyBall>> balls;
  std::size_t cell_index = 0;
  for (int ell : config.ells) {
    for (double d : config.densities) {
      const std::size_t cell = cell_index++;
      SweepRecord proto;
      proto.ell = ell;
      proto.d = d;
      proto.measure = measure_name(config.measure);
      proto.group = model.expr();

      MeasureSpec spec(config.measure, config.m, ell,
                       config.measure == MeasureKind::Geodesic ? config.L : 0);
      if (model_measure) spec.alphabet = model.alphabet();
      std::shared_ptr<const CayleyBall> ball;
      try {
        if (config.measure == MeasureKind::Geodesic) {
          auto it = balls.find(ell);
          if (it == balls.end()) {
            ball = std::make_shared<const CayleyBall>(model, ell + config.L,
                                                      config.ball_budget);
            balls.emplace(ell, ball);
          } else {
            ball = it->second;
          }
          spec.attach_ball(ball);
        }
        spec.validate();
        // Feasibility precheck: throws capacity_error on a hopeless cell.
        density_count(density_base(spec), d, ell, config.budget);
      } catch (const std::exception& e) {
        SweepRecord rec = proto;
        rec.verdict = "skipped";
        rec.skip_reason = e.what();
        records.push_back(std::move(rec));
        continue;
      }

      for (int trial = 0; trial < config.trials; ++trial) {
        const std::uint64_t stream = (static_cast<std::uint64_t>(cell) << 20) |
                                     static_cast<std::uint64_t>(trial);
        RngStream rng(config.master_seed, stream);
        SweepRecord rec = proto;
        rec.trial = trial;
        RelatorSet rs =
            sample_relator_set(spec, d, rng, config.master_seed, {}, config.budget);
        rec.n_words = rs.size();

        std::vector<LetterPair> ids;
        std::vector<int> kills;
        bool all_even = ell % 2 == 0;
        if (config.measure == MeasureKind::Geodesic) {
          all_even = config.L == 0 && ell % 2 == 0;
          auto scan = geodesic_collapse_scan(rs, *ball);
          kills = scan.killed_generators;
          rec.scan_hits = scan.witnesses.size();
        } else {
          auto scan = prefix_collision_scan(rs, 8);
          rec.collisions = scan.collision_pairs;
          ids = scan.identifications;
          if (config.measure == MeasureKind::Plain) {
            auto wab = plain_word_collapse_scan(model, rs, 8);
            rec.scan_hits = wab.collision_pairs;
            for (auto p : wab.identifications)
              if (std::find(ids.begin(), ids.end(), p) == ids.end())
                ids.push_back(p);
          }
          // Analytic birthday expectation for the prefix collision count.
          if (config.measure != MeasureKind::CyclicallyReduced && ell >= 2) {
            const double pairs = 0.5 * static_cast<double>(rec.n_words) *
                                 static_cast<double>(rec.n_words - 1);
            const double log_classes =
                log_bigint(count_words(config.measure, config.m, ell - 1));
            rec.birthday_expect = std::exp(std::log(std::max(pairs, 1e-300)) -
                                           log_classes);
          }
        }
        auto verdict = letter_collapse_verdict(ids, kills, config.m, all_even);
        rec.verdict = verdict_name(verdict.verdict);
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

}  // namespace rq
