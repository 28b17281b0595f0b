#include "rq/diagrams.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "rq/measure.hpp"

namespace rq {

// ---------------------------------------------------------------------------
// Davkd

int Davkd::n_labels() const {
  int n = 0;
  for (const auto& f : faces) n = std::max(n, f.label);
  return n;
}

int Davkd::slot_of(int face, int pos) const {
  const DavkdFace& f = faces[face];
  const int s = (f.start + f.orient * pos) % ell;
  return (s + ell) % ell;
}

Letter Davkd::edge_letter(int face, int pos, const std::vector<Word>& relators) const {
  const DavkdFace& f = faces[face];
  Letter x = relators[f.label - 1][slot_of(face, pos)];
  return f.orient == 1 ? x : Alphabet::inv(x);
}

void Davkd::validate() const {
  if (ell < 1) throw input_error("davkd: len must be positive");
  if (faces.empty()) throw input_error("davkd: no faces");
  const int n = n_labels();
  std::vector<bool> present(n + 1, false);
  for (const auto& f : faces) {
    if (f.label < 1 || f.label > n) throw input_error("davkd: bad face label");
    present[f.label] = true;
    if (f.start < 0 || f.start >= ell) throw input_error("davkd: bad start edge");
    if (f.orient != 1 && f.orient != -1) throw input_error("davkd: bad orientation");
  }
  for (int k = 1; k <= n; ++k)
    if (!present[k]) throw input_error("davkd: face labels must be 1..n");
  std::unordered_set<long> used;
  for (const auto& p : pairings) {
    if (p.face_a < 0 || p.face_a >= n_faces() || p.face_b < 0 || p.face_b >= n_faces())
      throw input_error("davkd: pairing face out of range");
    if (p.pos_a < 0 || p.pos_a >= ell || p.pos_b < 0 || p.pos_b >= ell)
      throw input_error("davkd: pairing position out of range");
    if (p.sign != 1 && p.sign != -1) throw input_error("davkd: pairing sign not +-1");
    const long ea = static_cast<long>(p.face_a) * ell + p.pos_a;
    const long eb = static_cast<long>(p.face_b) * ell + p.pos_b;
    if (ea == eb) throw input_error("davkd: edge paired with itself");
    if (!used.insert(ea).second || !used.insert(eb).second)
      throw input_error("davkd: edge position appears in two pairings");
  }
}

std::string Davkd::serialize() const {
  std::ostringstream out;
  out << "faces=" << n_faces() << " len=" << ell << "\n";
  for (const auto& f : faces)
    out << f.label << " " << f.start << " " << f.orient << "\n";
  for (const auto& p : pairings)
    out << p.face_a << " " << p.pos_a << " " << p.face_b << " " << p.pos_b << " "
        << p.sign << "\n";
  return out.str();
}

Davkd Davkd::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Davkd d;
  int n = -1;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (n < 0) {
      if (tok.rfind("faces=", 0) != 0)
        throw input_error("davkd parse: expected `faces=n len=l` header");
      n = std::stoi(tok.substr(6));
      if (!(ls >> tok) || tok.rfind("len=", 0) != 0)
        throw input_error("davkd parse: expected `len=` in header");
      d.ell = std::stoi(tok.substr(4));
      continue;
    }
    std::vector<int> nums{std::stoi(tok)};
    int x;
    while (ls >> x) nums.push_back(x);
    if (static_cast<int>(d.faces.size()) < n) {
      if (nums.size() != 3) throw input_error("davkd parse: face line needs 3 fields");
      d.faces.push_back({nums[0], nums[1], nums[2]});
    } else {
      if (nums.size() != 5)
        throw input_error("davkd parse: pairing line needs 5 fields");
      d.pairings.push_back({nums[0], nums[1], nums[2], nums[3], nums[4]});
    }
  }
  if (n < 0) throw input_error("davkd parse: empty input");
  if (static_cast<int>(d.faces.size()) != n)
    throw input_error("davkd parse: face count mismatch");
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------
// Gamma

namespace {

// Letter-relation sign of a pairing: r_u = r_v ^ gamma_sign with
// gamma_sign = -sign * orient_a * orient_b (-1: inverse letters, the
// paper's "orientations agree" case under the planar convention).
int gamma_sign(const Davkd& d, const DavkdPairing& p) {
  return -p.sign * d.faces[p.face_a].orient * d.faces[p.face_b].orient;
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

GammaGraph build_gamma(const Davkd& d) {
  d.validate();
  const int n = d.n_labels();
  std::vector<int> mult(n, 0);
  for (const auto& f : d.faces) ++mult[f.label - 1];

  GammaGraph g;
  g.ell = d.ell;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return mult[a] != mult[b] ? mult[a] > mult[b] : a < b;
  });
  std::vector<int> part_of(n);
  for (int p = 0; p < n; ++p) {
    part_of[order[p]] = p;
    g.multiplicity.push_back(mult[order[p]]);
    g.part_label.push_back(order[p] + 1);
  }
  for (const auto& p : d.pairings) {
    const int u = part_of[d.faces[p.face_a].label - 1] * d.ell + d.slot_of(p.face_a, p.pos_a);
    const int v = part_of[d.faces[p.face_b].label - 1] * d.ell + d.slot_of(p.face_b, p.pos_b);
    g.edges.push_back({u, v, gamma_sign(d, p)});
  }
  return g;
}

bool reduction_check(const Davkd& d) {
  for (const auto& p : d.pairings) {
    if (d.faces[p.face_a].label != d.faces[p.face_b].label) continue;
    if (d.slot_of(p.face_a, p.pos_a) != d.slot_of(p.face_b, p.pos_b)) continue;
    if (gamma_sign(d, p) == 1) return false;  // tautological r_k = r_k
  }
  return true;
}

GammaDims gamma_dims(const GammaGraph& gamma, const BigRat& d) {
  GammaDims out;
  const int n = gamma.parts();
  const int ell = gamma.ell;
  Dsu dsu(gamma.vertices());
  auto edges = gamma.edges;
  std::sort(edges.begin(), edges.end(), [ell](const auto& a, const auto& b) {
    return std::max(a.u, a.v) / ell < std::max(b.u, b.v) / ell;
  });
  std::size_t next_edge = 0;
  int components = 0;
  for (int i = 1; i <= n; ++i) {
    components += ell;
    while (next_edge < edges.size() &&
           std::max(edges[next_edge].u, edges[next_edge].v) / ell < i) {
      if (dsu.unite(edges[next_edge].u, edges[next_edge].v)) --components;
      ++next_edge;
    }
    out.components.push_back(components);
    BigRat di = BigRat(i) * d * ell + components - BigRat(i) * ell;
    out.dims.push_back(di);
    if (i == 1 || di < out.min_dim) {
      out.min_dim = di;
      out.min_index = i;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fulfillment

bool fulfill_check(const Davkd& d, const std::vector<Word>& relators,
                   std::string* fail_reason) {
  d.validate();
  if (static_cast<int>(relators.size()) != d.n_labels())
    throw input_error("fulfill_check: need one word per distinct label");
  for (const auto& w : relators)
    if (static_cast<int>(w.size()) != d.ell)
      throw input_error("fulfill_check: word length != face perimeter");
  for (std::size_t i = 0; i < d.pairings.size(); ++i) {
    const auto& p = d.pairings[i];
    const Letter a = d.edge_letter(p.face_a, p.pos_a, relators);
    const Letter b = d.edge_letter(p.face_b, p.pos_b, relators);
    const bool ok = (p.sign == 1) ? (a == Alphabet::inv(b)) : (a == b);
    if (!ok) {
      if (fail_reason)
        *fail_reason = "pairing " + std::to_string(i) + " carries letters " +
                       std::to_string(a) + "/" + std::to_string(b);
      return false;
    }
  }
  return true;
}

namespace {

// Union-find with a relative sign: value(x) = value(root)^(parity ? -1 : +1).
struct SignedDsu {
  std::vector<int> parent;
  std::vector<char> parity;
  bool dead = false;  // some slot was forced equal to its own inverse
  explicit SignedDsu(int n) : parent(n), parity(n, 0) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::pair<int, int> find(int x) {
    int p = 0;
    int r = x;
    while (parent[r] != r) {
      p ^= parity[r];
      r = parent[r];
    }
    // path compression
    while (parent[x] != r) {
      int nxt = parent[x];
      int np = p ^ parity[x];
      parent[x] = r;
      parity[x] = static_cast<char>(p);
      p = np;
      x = nxt;
    }
    return {r, p};
  }
  // relation value(a) = value(b)^sign
  void relate(int a, int b, int sign) {
    auto [ra, pa] = find(a);
    auto [rb, pb] = find(b);
    const int rel = (sign == -1) ? 1 : 0;
    if (ra == rb) {
      if ((pa ^ pb) != rel) dead = true;
      return;
    }
    parent[rb] = ra;
    parity[rb] = static_cast<char>(pa ^ pb ^ rel);
  }
};

}  // namespace

FulfillCount count_fulfilling_reduced(const Davkd& d, int m) {
  d.validate();
  if (m < 1) throw input_error("count_fulfilling_reduced: m < 1");
  const int n = d.n_labels();
  const int ell = d.ell;
  const int slots = n * ell;
  if (slots > 40)
    throw capacity_error("count_fulfilling_reduced: n*ell exceeds the exact budget");
  const int letters = 2 * m;

  SignedDsu dsu(slots);
  for (const auto& p : d.pairings) {
    const int u = (d.faces[p.face_a].label - 1) * ell + d.slot_of(p.face_a, p.pos_a);
    const int v = (d.faces[p.face_b].label - 1) * ell + d.slot_of(p.face_b, p.pos_b);
    dsu.relate(u, v, gamma_sign(d, p));
  }
  FulfillCount out;
  if (dsu.dead) return out;

  // Slot -> (shared-component index, parity) or -1 for a free singleton.
  std::vector<int> root_of(slots), parity_of(slots), comp_of(slots, -1);
  std::vector<int> comp_size(slots, 0);
  for (int s = 0; s < slots; ++s) {
    auto [r, p] = dsu.find(s);
    root_of[s] = r;
    parity_of[s] = p;
    ++comp_size[r];
  }
  std::vector<int> shared_index(slots, -1);
  int n_shared = 0;
  for (int s = 0; s < slots; ++s)
    if (root_of[s] == s && comp_size[s] >= 2) shared_index[s] = n_shared++;
  for (int s = 0; s < slots; ++s)
    if (shared_index[root_of[s]] >= 0) comp_of[s] = shared_index[root_of[s]];
  if (n_shared > 16)
    throw capacity_error("count_fulfilling_reduced: too many shared components");

  // Adjacency constraints between two shared slots, checked during the
  // enumeration as soon as both endpoints are assigned.
  struct SharedAdj {
    int ca, pa, cb, pb;  // components and parities of slots p, p+1
  };
  std::vector<SharedAdj> shared_adj;
  for (int w = 0; w < n; ++w)
    for (int p = 0; p + 1 < ell; ++p) {
      const int u = w * ell + p, v = w * ell + p + 1;
      if (comp_of[u] >= 0 && comp_of[v] >= 0)
        shared_adj.push_back({comp_of[u], parity_of[u], comp_of[v], parity_of[v]});
    }

  auto slot_letter = [&](int slot, const std::vector<int>& assign) {
    const int base = assign[comp_of[slot]];
    return parity_of[slot] ? (base ^ 1) : base;
  };

  std::vector<int> assign(n_shared, -1);
  std::vector<BigInt> dp(letters), ndp(letters);

  // Chain DP for one word under a complete shared assignment; if witness is
  // non-null and the count is positive, one word is reconstructed into it.
  auto word_count = [&](int w, Word* witness) {
    std::vector<std::vector<BigInt>> table(ell + 1,
                                           std::vector<BigInt>(letters, 0));
    // backward: table[p][x] = completions of positions p..ell-1 given
    // letter x at position p (0 when x is not allowed at p)
    for (int p = ell - 1; p >= 0; --p) {
      const int slot = w * ell + p;
      const int fixed = comp_of[slot] >= 0 ? slot_letter(slot, assign) : -1;
      for (int x = 0; x < letters; ++x) {
        if (fixed >= 0 && x != fixed) continue;
        if (p == ell - 1) {
          table[p][x] = 1;
          continue;
        }
        BigInt acc = 0;
        for (int y = 0; y < letters; ++y)
          if (y != (x ^ 1)) acc += table[p + 1][y];
        table[p][x] = acc;
      }
    }
    BigInt total = 0;
    for (int x = 0; x < letters; ++x) total += table[0][x];
    if (witness && total > 0) {
      witness->clear();
      int prev = -1;
      for (int p = 0; p < ell; ++p) {
        for (int x = 0; x < letters; ++x) {
          if (prev >= 0 && x == (prev ^ 1)) continue;
          if (table[p][x] > 0) {
            witness->push_back(static_cast<Letter>(x));
            prev = x;
            break;
          }
        }
      }
    }
    return total;
  };

  // Depth-first enumeration over shared components with adjacency pruning.
  std::function<void(int)> rec = [&](int c) {
    if (c == n_shared) {
      BigInt prod = 1;
      for (int w = 0; w < n && prod > 0; ++w) prod *= word_count(w, nullptr);
      if (prod > 0 && !out.satisfiable) {
        out.satisfiable = true;
        out.witness.assign(n, Word());
        for (int w = 0; w < n; ++w) word_count(w, &out.witness[w]);
      }
      out.count += prod;
      return;
    }
    for (int x = 0; x < letters; ++x) {
      assign[c] = x;
      bool ok = true;
      for (const auto& a : shared_adj) {
        if (std::max(a.ca, a.cb) != c) continue;
        const int la = a.pa ? (assign[a.ca] ^ 1) : assign[a.ca];
        const int lb = a.pb ? (assign[a.cb] ^ 1) : assign[a.cb];
        if (lb == (la ^ 1)) {
          ok = false;
          break;
        }
      }
      if (ok) rec(c + 1);
    }
    assign[c] = -1;
  };
  rec(0);
  return out;
}

// ---------------------------------------------------------------------------
// Isoperimetry

IsoReport iso_check(const Davkd& d, const BigRat& density) {
  IsoReport rep;
  const GammaGraph gamma = build_gamma(d);
  rep.dims = gamma_dims(gamma, density);
  rep.boundary_length = d.boundary_length();
  const int faces = d.n_faces();
  rep.corollary_bound =
      BigRat(d.ell) * faces * (BigRat(1, 2) - density);
  rep.corollary_satisfied = BigRat(rep.boundary_length) >= rep.corollary_bound;
  BigRat refinement = 0;
  const int n = gamma.parts();
  for (int i = 0; i < n; ++i) {
    const int mi = gamma.multiplicity[i];
    const int mnext = (i + 1 < n) ? gamma.multiplicity[i + 1] : 0;
    refinement += rep.dims.dims[i] * (mi - mnext);
  }
  rep.lemma_rhs = BigRat(d.ell) * faces * (1 - 2 * density) + 2 * refinement;
  rep.lemma_satisfied = BigRat(rep.boundary_length) >= rep.lemma_rhs;
  return rep;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

bool loop_free(const Davkd& d) {
  for (const auto& p : d.pairings) {
    if (d.faces[p.face_a].label != d.faces[p.face_b].label) continue;
    if (d.slot_of(p.face_a, p.pos_a) == d.slot_of(p.face_b, p.pos_b)) return false;
  }
  return true;
}

}  // namespace

void enumerate_davkd(int K, int ell, const std::function<void(const Davkd&)>& sink) {
  if (K != 1 && K != 2)
    throw input_error("enumerate_davkd: only K in {1,2} is supported");
  if (ell < 1) throw input_error("enumerate_davkd: ell < 1");

  if (K == 1) {
    // One face folded along an arc of length a starting at edge v: edge
    // v+i glued to edge v+2a-1-i (hairpin).  2a < ell keeps the boundary
    // nonempty.
    for (int a = 1; 2 * a < ell; ++a)
      for (int v = 0; v < ell; ++v)
        for (int s = 0; s < ell; ++s)
          for (int o : {1, -1}) {
            Davkd d;
            d.ell = ell;
            d.planar_checked = true;
            d.faces.push_back({1, s, o});
            for (int i = 0; i < a; ++i)
              d.pairings.push_back(
                  {0, (v + i) % ell, 0, (v + 2 * a - 1 - i) % ell, 1});
            if (!loop_free(d) || !reduction_check(d)) continue;
            sink(d);
          }
    return;
  }

  // K = 2: two faces sharing one arc of length L; face 0 edges p..p+L-1
  // meet face 1 edges q+L-1..q (opposite traversal, planar).
  for (int L = 1; L < ell; ++L)
    for (int p = 0; p < ell; ++p)
      for (int q = 0; q < ell; ++q)
        for (int same_label = 0; same_label < 2; ++same_label)
          for (int s0 = 0; s0 < ell; ++s0)
            for (int s1 = 0; s1 < ell; ++s1)
              for (int o0 : {1, -1})
                for (int o1 : {1, -1}) {
                  Davkd d;
                  d.ell = ell;
                  d.planar_checked = true;
                  d.faces.push_back({1, s0, o0});
                  d.faces.push_back({same_label ? 1 : 2, s1, o1});
                  for (int i = 0; i < L; ++i)
                    d.pairings.push_back(
                        {0, (p + i) % ell, 1, (q + L - 1 - i) % ell, 1});
                  if (!loop_free(d) || !reduction_check(d)) continue;
                  sink(d);
                }
}

std::vector<Davkd> enumerate_davkd_all(int K, int ell) {
  std::vector<Davkd> out;
  enumerate_davkd(K, ell, [&](const Davkd& d) { out.push_back(d); });
  return out;
}

// ---------------------------------------------------------------------------
// Basic-picture gluing probability

GlueProbEstimate glue_prob_mc(int m, int ell, int L, std::uint64_t trials,
                              RngStream& rng) {
  if (L < 0 || (L >= 1 && L + 1 > ell))
    throw input_error("glue_prob_mc: need L + 1 <= ell");
  GlueProbEstimate est;
  est.trials = trials;
  est.reference = std::pow(2.0 * m - 1.0, -static_cast<double>(L));
  if (L == 0) {
    est.estimate = 1.0;
    est.seed_hits = est.window_hits = trials;
    return est;
  }
  MeasureSpec spec(MeasureKind::Reduced, m, ell, 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const Word w1 = sample_word(spec, rng);
    const Word w2 = sample_word(spec, rng);
    // Anti-parallel window: w1[i] glued to w2[L-i]; i = 0 is the seed edge.
    if (w1[0] != Alphabet::inv(w2[L])) continue;
    ++est.seed_hits;
    bool all = true;
    for (int i = 1; i <= L && all; ++i) all = w1[i] == Alphabet::inv(w2[L - i]);
    if (all) ++est.window_hits;
  }
  est.censored = est.seed_hits == 0 || est.window_hits == 0;
  if (est.seed_hits > 0)
    est.estimate =
        static_cast<double>(est.window_hits) / static_cast<double>(est.seed_hits);
  return est;
}

}  // namespace rq
