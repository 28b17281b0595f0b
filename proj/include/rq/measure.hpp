#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rq/ball.hpp"
#include "rq/bigint.hpp"
#include "rq/rng.hpp"
#include "rq/word.hpp"

namespace rq {

enum class MeasureKind { Plain, Reduced, CyclicallyReduced, Geodesic };

std::string measure_name(MeasureKind k);
MeasureKind measure_from_name(const std::string& name);

// One of the word measures mu_ell: uniform over plain / reduced /
// cyclically reduced words of length ell, or uniform over a geodesic
// annulus of norms [ell-L, ell+L] in an attached model.
struct MeasureSpec {
  MeasureKind kind = MeasureKind::Reduced;
  int m = 2;    // named generators; the alphabet has 2m letter slots
  int ell = 1;  // word length / target norm
  int L = 0;    // annulus halfwidth (Geodesic only)
  Alphabet alphabet;  // used for tokens; defaults to a1..am

  // Geodesic state, built by attach_ball().
  std::shared_ptr<const CayleyBall> ball;
  std::shared_ptr<const std::vector<Word>> slice;

  MeasureSpec() : alphabet(2) {}
  MeasureSpec(MeasureKind k, int m_, int ell_, int L_ = 0);

  void validate() const;
  void attach_ball(std::shared_ptr<const CayleyBall> b);

  std::string json_header(double density, std::uint64_t seed,
                          std::uint64_t count) const;
};

// Exact class sizes: Plain (2m)^ell, Reduced 2m(2m-1)^(ell-1),
// CyclicallyReduced by transfer-matrix trace.  Geodesic sizes come from the
// attached ball (annulus cardinality).
BigInt count_words(MeasureKind kind, int m, int ell);
BigInt count_words(const MeasureSpec& spec);

// The density base the relator-count formula is taken in: (2m)^ell for
// plain words, (2m-1)^ell for (cyclically) reduced ones, the annulus
// cardinality for geodesic words.
BigInt density_base(const MeasureSpec& spec);

// floor(base^d), in log space with an exact fallback when the base is
// small.  Throws capacity_error (naming the maximal feasible density)
// when the result exceeds the budget.
std::uint64_t density_count(const BigInt& base, double d, int ell,
                            std::uint64_t budget = 10000000);

Word sample_word(const MeasureSpec& spec, RngStream& rng);

// Sampled relator multiset with flat word storage (cells at desk-scale
// density reach 10^7 words).
class RelatorSet {
 public:
  RelatorSet() = default;
  RelatorSet(const MeasureSpec& spec, double density, std::uint64_t seed)
      : spec_(spec), density_(density), seed_(seed) {}

  const MeasureSpec& spec() const { return spec_; }
  double density() const { return density_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t size() const { return offsets_.size(); }
  std::span<const Letter> word(std::size_t i) const {
    std::size_t b = offsets_[i];
    std::size_t e = (i + 1 < offsets_.size()) ? offsets_[i + 1] : data_.size();
    return {data_.data() + b, e - b};
  }
  Word word_copy(std::size_t i) const {
    auto v = word(i);
    return Word(v.begin(), v.end());
  }
  void push(std::span<const Letter> w) {
    offsets_.push_back(data_.size());
    data_.insert(data_.end(), w.begin(), w.end());
  }
  void reserve(std::size_t n, std::size_t avg_len) {
    offsets_.reserve(n);
    data_.reserve(n * avg_len);
  }

  void serialize(std::ostream& out) const;
  static RelatorSet deserialize(std::istream& in);

 private:
  MeasureSpec spec_;
  double density_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<Letter> data_;
  std::vector<std::size_t> offsets_;
};

// N independent draws, N = density_count(density_base(spec), d, ell) unless
// overridden.  Duplicates are retained (multiset semantics).
RelatorSet sample_relator_set(const MeasureSpec& spec, double d, RngStream& rng,
                              std::uint64_t seed_echo = 0,
                              std::optional<std::uint64_t> count_override = {},
                              std::uint64_t budget = 10000000);

}  // namespace rq
