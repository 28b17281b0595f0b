#include "rq/word.hpp"

#include <algorithm>
#include <cctype>

namespace rq {

std::string Alphabet::token(Letter x) const {
  if (!valid(x)) throw input_error("token: letter index out of range");
  std::string n = name(generator_of(x));
  if (is_inverse_slot(x)) {
    n[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(n[0])));
  }
  return n;
}

std::string Alphabet::format(const Word& w) const {
  std::string out;
  for (Letter x : w) out += token(x);
  return out;
}

Word Alphabet::parse(const std::string& text) const {
  Word w;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
      ++j;
    std::string tok = text.substr(i, j - i);
    bool upper = std::isupper(static_cast<unsigned char>(tok[0]));
    std::string lower = tok;
    lower[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(lower[0])));
    int gen = -1;
    for (int g = 0; g < generators(); ++g)
      if (names_[g] == lower) {
        gen = g;
        break;
      }
    if (gen < 0) throw input_error("parse: unknown letter token '" + tok + "'");
    w.push_back(static_cast<Letter>(2 * gen + (upper ? 1 : 0)));
    i = j;
  }
  return w;
}

Word free_reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (Letter x : w) {
    if (!out.empty() && out.back() == Alphabet::inv(x))
      out.pop_back();
    else
      out.push_back(x);
  }
  return out;
}

Word cyclic_reduce(const Word& w) {
  Word r = free_reduce(w);
  std::size_t a = 0, b = r.size();
  while (b > a + 1 && r[a] == Alphabet::inv(r[b - 1])) {
    ++a;
    --b;
  }
  return Word(r.begin() + a, r.begin() + b);
}

bool is_reduced(const Word& w) {
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] == Alphabet::inv(w[i - 1])) return false;
  return true;
}

bool is_cyclically_reduced(const Word& w) {
  if (!is_reduced(w)) return false;
  if (w.size() >= 2 && w.front() == Alphabet::inv(w.back())) return false;
  return true;
}

Word inverse_word(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it)
    out.push_back(Alphabet::inv(*it));
  return out;
}

}  // namespace rq
