#pragma once

#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rq/ball.hpp"
#include "rq/bigint.hpp"
#include "rq/measure.hpp"
#include "rq/model.hpp"
#include "rq/spectra.hpp"

namespace rq {

// ---------------------------------------------------------------------------
// Letter identifications and the collapse verdict

enum class Verdict { Trivial, Z2, Inconclusive };
std::string verdict_name(Verdict v);

using LetterPair = std::pair<Letter, Letter>;  // unordered, stored first < second

struct PrefixScanResult {
  std::uint64_t collision_pairs = 0;  // pairs sharing the (ell-1)-prefix
  std::vector<LetterPair> identifications;  // distinct last-letter pairs
  std::vector<std::pair<std::uint64_t, std::uint64_t>> witnesses;  // capped
};

// All unordered pairs of relators sharing their first ell-1 letters; each
// pair with distinct last letters a_i, a_j certifies a_i = a_j in the
// quotient.  Exact indexing (packed keys + sort when the word fits in 64
// bits, lexicographic sort otherwise).
PrefixScanResult prefix_collision_scan(const RelatorSet& relators,
                                       std::size_t witness_cap = 64);

struct CollapseReport {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<LetterPair> identifications;
  std::vector<int> killed_generators;
  bool all_lengths_even = true;
  int letter_classes = 0;  // classes of the 2m letters after closure
  std::vector<std::pair<std::uint64_t, std::uint64_t>> evidence;
};

// Union-find closure under the involution symmetry (x~y forces x~~y~).
// Verdicts are conservative: Z2 / Trivial only on a complete certificate.
CollapseReport letter_collapse_verdict(const std::vector<LetterPair>& identifications,
                                       const std::vector<int>& killed_generators,
                                       int m, bool all_lengths_even);

// wab scan: relators whose length-(ell-2) prefix is trivial in the base
// model certify ab = e, i.e. the identification (a, b~).
PrefixScanResult plain_word_collapse_scan(const GroupModel& model,
                                          const RelatorSet& relators,
                                          std::size_t witness_cap = 64);

struct GeodesicScanResult {
  std::vector<int> killed_generators;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> witnesses;  // (x, y): xa = y
};

// For each generator a, exact detection of pairs x, y in R with xa = y via
// the ball's canonical-form index.  Each hit kills a in the quotient.
GeodesicScanResult geodesic_collapse_scan(const RelatorSet& relators,
                                          const CayleyBall& ball);

// ---------------------------------------------------------------------------
// Abelianization

// Streaming exponent-lattice fold: feed words one at a time, read off the
// invariant factors at the end.  Machine-integer Hermite accumulation;
// entries stay reduced below the pivots.
class AbelianAccumulator {
 public:
  explicit AbelianAccumulator(const Alphabet& alphabet);
  void add(std::span<const Letter> word);
  std::vector<BigInt> invariant_factors() const;

 private:
  void fold(std::vector<long long> v);
  Alphabet alphabet_;
  std::vector<std::vector<long long>> basis_;  // basis_[i]: pivot at row i
};

// Invariant factors d1 | d2 | ... of the m x N exponent-sum matrix (0 =
// free factor).  A generator with u = u~ contributes an extra congruence
// column 2 e_u.
std::vector<BigInt> abelianization(const RelatorSet& relators);

// General Smith normal form (exact).  Returns min(rows, cols) invariant
// factors, trailing zeros for the free part.
std::vector<BigInt> smith_invariant_factors(std::vector<std::vector<BigInt>> a);

// ---------------------------------------------------------------------------
// Small cancellation

struct PieceWitness {
  std::uint64_t word_a = 0, word_b = 0;
  bool inv_a = false, inv_b = false;
  int shift_a = 0, shift_b = 0;
  int length = 0;
};

struct SmallCancellationReport {
  int ell = 0;
  int max_piece = 0;
  bool max_piece_exact = true;
  double ratio = 0.0;
  bool satisfies = false;  // ratio < 1/6
  std::optional<PieceWitness> witness;
};

// Pieces are common subwords among the relators, their inverses and all
// cyclic shifts (occurrences at distinct (word, inverse, shift) triples).
// threshold_only decides ratio < 1/6 by a single winnowing pass at
// t = ceil(ell/6) and reports a witness-length lower bound; otherwise the
// exact max piece is found by bisection over shared-window lengths.
SmallCancellationReport small_cancellation_check(const RelatorSet& relators,
                                                 bool threshold_only = false);

// Streaming form of the threshold decision: feed cyclically reduced words of
// one fixed length and learn, as soon as it happens, that two distinct
// occurrences (word, inversion, cyclic shift) share a subword of length >=
// threshold.  Piece existence is monotone in the relator set, so stopping at
// the first hit decides the full set's verdict.  Winnowed fingerprints are
// letter-verified, so there are no false positives, and the window-minimum
// selection rule admits no false negatives.
class PieceThresholdScanner {
 public:
  // max_words sizes the fingerprint table up front; exceeding it throws
  // capacity_error, as does a table that will not fit the node budget.
  PieceThresholdScanner(int ell, int threshold, std::uint64_t max_words);
  ~PieceThresholdScanner();
  PieceThresholdScanner(const PieceThresholdScanner&) = delete;
  PieceThresholdScanner& operator=(const PieceThresholdScanner&) = delete;

  // Adds the word and its inverse (all cyclic shifts are implicit) and
  // returns true once a threshold piece has been found.  Large tables defer
  // probes into per-region buffers, so a hit may surface a few adds late;
  // call finish() after the last word for the final verdict.
  bool add(std::span<const Letter> word);

  // Drains buffered probes; returns the verdict for everything added.
  bool finish();

  // Clears all words and the table for a fresh run, keeping the allocations.
  void reset();

  bool found() const { return found_; }
  const PieceWitness& witness() const { return witness_; }
  std::uint64_t words() const { return n_words_; }

 private:
  void scan_strand(std::uint32_t strand);
  void probe(std::uint32_t strand, int pos, std::uint64_t fp);
  void enqueue(std::uint32_t strand, int pos, std::uint64_t fp);
  void flush_region(std::size_t region);

  int ell_, t_, k_, w_;
  std::uint64_t rk_ = 1;          // hash multiplier to the (k-1)-th power
  std::uint64_t max_words_ = 0;
  std::uint64_t n_words_ = 0;
  std::size_t mask_ = 0;
  std::size_t fill_ = 0;
  // Packed (tag | strand | position) + 1 per slot, 0 = empty.  Backed by an
  // anonymous huge-page mapping: random probes into a GB-scale table are
  // TLB-walk bound on 4k pages, and untouched tail pages cost nothing.
  std::uint64_t* table_ = nullptr;
  std::size_t table_bytes_ = 0;
  // Probe buffering for DRAM-scale tables: probes are batched per ~1 MB
  // table region and resolved region-at-a-time while the region is hot.
  int region_shift_ = 0;              // slot >> shift = region; 0 = direct
  std::size_t n_regions_ = 0;
  std::vector<std::uint64_t> buf_ent_;  // interleaved (fp, occ) pairs
  std::vector<std::uint32_t> buf_n_;
  std::vector<Letter> letters_;       // flat strand storage, 2*ell per word
  std::vector<std::uint64_t> fps_;    // scratch: k-gram fingerprints
  std::vector<Letter> buf_;           // scratch: doubled strand
  std::vector<std::int32_t> dq_;      // scratch: monotone window queue
  std::vector<std::int32_t> early_;   // scratch: pre-wrap minima below w-1
  std::vector<std::int32_t> sels_;    // scratch: selected positions per strand
  bool found_ = false;
  PieceWitness witness_;
};

// ---------------------------------------------------------------------------
// Axiom probes

struct AxiomProbeReport {
  int axiom = 3;
  std::vector<int> grid;  // subword lengths |x| (= |y| for axiom 3)
  std::vector<std::uint64_t> hits;
  std::vector<std::uint64_t> trials;
  std::vector<double> log_prob;  // base-2m log of the hit fraction; NaN censored
  double fitted_exponent = 0.0;  // decay per letter of total length
  double fit_stderr = 0.0;
  double reference = 0.0;  // 1 - theta for the probed model
  int used_points = 0;
};

// Axiom 3 probe: Pr(x y = e) for independent words of the grid lengths,
// fitted against (2m)^(-beta (|x|+|y|)).  Axiom 2 probe: tail
// Pr(|x| <= kappa |w|) with kappa = (1-theta)/(2 theta), reference
// exponent (1-theta) - theta kappa.
AxiomProbeReport axiom_probe(const GroupModel& model, MeasureKind kind, int axiom,
                             const std::vector<int>& grid, std::uint64_t trials,
                             double theta_reference, RngStream& rng);

// ---------------------------------------------------------------------------
// Phase sweep

struct SweepConfig {
  std::string group_expr = "free(2)";
  MeasureKind measure = MeasureKind::Reduced;
  int m = 2;
  int L = 1;  // geodesic annulus halfwidth
  std::vector<int> ells;
  std::vector<double> densities;
  int trials = 50;
  std::uint64_t master_seed = 1;
  std::uint64_t budget = 10000000;
  std::size_t ball_budget = 5000000;
};

struct SweepRecord {
  int ell = 0;
  double d = 0.0;
  int trial = 0;
  std::string measure;
  std::string group;
  std::string verdict;  // or "skipped"
  std::string skip_reason;
  std::uint64_t n_words = 0;
  std::uint64_t collisions = 0;
  std::uint64_t scan_hits = 0;
  double birthday_expect = -1.0;  // analytic expectation; < 0 if n/a
};

// Cells are (ell, d); within each cell, trials use stream ids derived from
// (cell index, trial index) so results are independent of execution order.
std::vector<SweepRecord> phase_sweep(const SweepConfig& config);

}  // namespace rq
