#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rq/bigint.hpp"
#include "rq/rng.hpp"
#include "rq/word.hpp"

namespace rq {

// ---------------------------------------------------------------------------
// Decorated abstract van Kampen diagrams (standard case: uniform perimeter)

struct DavkdFace {
  int label = 1;   // relator number, 1..n
  int start = 0;   // marked starting edge
  int orient = 1;  // +1 / -1
};

// Internal-edge identification between (face_a, pos_a) and (face_b, pos_b).
// sign +1 is the planar convention (the two boundary traversals read inverse
// letters across the shared edge); sign -1 is a folded gluing (equal
// letters).  Positions are edge indices in [0, ell).
struct DavkdPairing {
  int face_a = 0, pos_a = 0;
  int face_b = 0, pos_b = 0;
  int sign = 1;
};

struct Davkd {
  int ell = 0;
  std::vector<DavkdFace> faces;
  std::vector<DavkdPairing> pairings;
  bool planar_checked = false;  // set by the enumerator; user input is abstract

  int n_faces() const { return static_cast<int>(faces.size()); }
  int n_labels() const;
  int boundary_length() const {  // no-filament convention
    return n_faces() * ell - 2 * static_cast<int>(pairings.size());
  }

  // Relator letter position on the face's word at edge k, and the letter
  // read along the boundary there (inverted when orient = -1).
  int slot_of(int face, int pos) const;
  Letter edge_letter(int face, int pos, const std::vector<Word>& relators) const;

  void validate() const;

  // Text format: `faces=n len=l`, then one face per line `label start
  // orient`, then one pairing per line `i k j k' sign`.
  std::string serialize() const;
  static Davkd parse(const std::string& text);
};

// ---------------------------------------------------------------------------
// The letter-constraint graph

// Vertex part*ell + slot stands for letter `slot` of relator
// `part_label[part]`.  Edge sign -1 means the letters are inverse (the two
// faces' orientations agree), +1 means equal.  Parts are ordered by
// nonincreasing multiplicity m_i, as the dimension argument requires.
struct GammaGraph {
  int ell = 0;
  std::vector<int> multiplicity;  // m_i per part, nonincreasing
  std::vector<int> part_label;
  struct Edge {
    int u, v, sign;
  };
  std::vector<Edge> edges;

  int parts() const { return static_cast<int>(multiplicity.size()); }
  int vertices() const { return parts() * ell; }
};

GammaGraph build_gamma(const Davkd& d);

// False iff some pairing imposes the tautological relation r_k = r_k
// (equal-numbered faces, same relator letter position, opposite
// orientations under the planar sign): the chessboard cancellation.
bool reduction_check(const Davkd& d);

struct GammaDims {
  std::vector<int> components;  // C_i of the filtration level i = 1..n
  std::vector<BigRat> dims;     // d_i = i d ell + C_i - i ell, exact
  int min_index = 1;            // 1-based argmin
  BigRat min_dim;
};

GammaDims gamma_dims(const GammaGraph& gamma, const BigRat& d);

// ---------------------------------------------------------------------------
// Fulfillment

// True iff placing words on the faces (label k gets relators[k-1], read
// from each face's start following its orientation) satisfies every
// pairing.  fail_reason gets the first offending pairing when false.
bool fulfill_check(const Davkd& d, const std::vector<Word>& relators,
                   std::string* fail_reason = nullptr);

struct FulfillCount {
  BigInt count = 0;
  bool satisfiable = false;
  std::vector<Word> witness;  // one fulfilling reduced tuple when satisfiable
};

// Exact number of tuples of reduced length-ell words over F_m fulfilling
// the diagram: letter propagation along Gamma components, enumeration over
// the shared components, and a per-word chain DP for the free positions.
FulfillCount count_fulfilling_reduced(const Davkd& d, int m);

// ---------------------------------------------------------------------------
// Isoperimetry

struct IsoReport {
  int boundary_length = 0;
  BigRat corollary_bound;  // ell |D| (1/2 - d)
  bool corollary_satisfied = false;
  BigRat lemma_rhs;  // ell |D| (1-2d) + 2 sum d_i (m_i - m_{i+1})
  bool lemma_satisfied = false;
  GammaDims dims;
};

IsoReport iso_check(const Davkd& d, const BigRat& density);

// ---------------------------------------------------------------------------
// Enumeration (K <= 2) and the basic-picture gluing probability

// Complete, duplicate-free stream of the planar K-face shapes with all
// decorations: K=1 is one face folded along an arc, K=2 two faces sharing
// one arc.  Only loop-free reduced diagrams are emitted (the dimension
// lemma is stated for those).  K > 2 -> input error (documented non-goal).
void enumerate_davkd(int K, int ell, const std::function<void(const Davkd&)>& sink);
std::vector<Davkd> enumerate_davkd_all(int K, int ell);

struct GlueProbEstimate {
  double estimate = 0.0;   // P(L-window glues | seed edge glues)
  double reference = 0.0;  // (2m-1)^{-L}
  std::uint64_t trials = 0;
  std::uint64_t seed_hits = 0;
  std::uint64_t window_hits = 0;
  bool censored = false;
};

GlueProbEstimate glue_prob_mc(int m, int ell, int L, std::uint64_t trials,
                              RngStream& rng);

}  // namespace rq
