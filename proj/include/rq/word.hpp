#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rq/errors.hpp"

namespace rq {

using Letter = std::uint8_t;
using Word = std::vector<Letter>;

// Symmetric alphabet on 2m letter slots.  Generator j occupies slots 2j
// (positive) and 2j+1 (inverse); inv() swaps the two slots of a pair.
//
// Density arithmetic in the source material is letter-level: an order-2
// generator u (u = u^-1 as a group element) still occupies two slots, so
// that e.g. F_4 x Z/2 x F_4-style groups live on 4m+2 letters.  Such
// generators are recorded in element_involution.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(int num_generators)
      : names_(), involution_(num_generators, false) {
    if (num_generators < 1 || num_generators > 120)
      throw input_error("alphabet: generator count out of range");
    for (int j = 0; j < num_generators; ++j)
      names_.push_back("a" + std::to_string(j + 1));
  }

  int generators() const { return static_cast<int>(names_.size()); }
  int size() const { return 2 * generators(); }

  static Letter inv(Letter x) { return x ^ 1; }
  static Letter positive(int gen) { return static_cast<Letter>(2 * gen); }
  static int generator_of(Letter x) { return x >> 1; }
  static bool is_inverse_slot(Letter x) { return x & 1; }

  bool element_involution(int gen) const { return involution_.at(gen); }
  bool element_involution_letter(Letter x) const {
    return involution_.at(generator_of(x));
  }

  void set_name(int gen, const std::string& name, bool is_involution) {
    names_.at(gen) = name;
    involution_.at(gen) = is_involution;
  }

  const std::string& name(int gen) const { return names_.at(gen); }

  bool valid(Letter x) const { return x < size(); }
  void check(const Word& w) const {
    for (Letter x : w)
      if (!valid(x)) throw input_error("word: letter index out of range");
  }

  // Token for one letter slot: "a3" / "A3", or "u" / "U" for involutions.
  std::string token(Letter x) const;

  std::string format(const Word& w) const;
  Word parse(const std::string& text) const;

 private:
  std::vector<std::string> names_;
  std::vector<bool> involution_;
};

Word free_reduce(const Word& w);
Word cyclic_reduce(const Word& w);

bool is_reduced(const Word& w);
bool is_cyclically_reduced(const Word& w);

Word inverse_word(const Word& w);

}  // namespace rq
