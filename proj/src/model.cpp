#include "rq/model.hpp"

#include <algorithm>
#include <cctype>

#include "rq/errors.hpp"

namespace rq {

struct GroupModel::Impl {
  ModelKind kind = ModelKind::Free;
  Alphabet alphabet;
  std::string expr;
  std::vector<char> gen_class;  // 'f' free, 'i' finite involution, 't' other finite

  // Free
  int m = 0;

  // Finite
  int n_elements = 0;
  std::vector<int> mult;         // n_elements x n_elements
  std::vector<int> letter_elem;  // letter slot -> element
  std::vector<Word> canon;       // canonical (local) word per element
  std::vector<int> elem_norm;

  // DirectWithFinite (factors = {inner, finite}) and FreeProduct
  std::vector<GroupModel> factors;
  std::vector<int> offsets;        // first letter slot of each factor
  std::vector<int> letter_factor;  // letter slot -> factor index

  int fold_finite(const Word& w, int offset) const {
    int e = 0;  // identity is element 0 in all finite tables
    for (Letter x : w) {
      int lx = x - offset;
      e = mult[e * n_elements + letter_elem[lx]];
    }
    return e;
  }
};

namespace {

// Generator display names depend only on position and class: free generators
// are a1, a2, ... across the whole model, finite involutions u, v, ...,
// other finite generators t1, t2, ...
void assign_names(GroupModel::Impl& impl) {
  static const char* kInvNames[] = {"u", "v", "w", "x", "y", "z"};
  int free_count = 0, inv_count = 0, fin_count = 0;
  impl.alphabet = Alphabet(static_cast<int>(impl.gen_class.size()));
  for (int g = 0; g < static_cast<int>(impl.gen_class.size()); ++g) {
    switch (impl.gen_class[g]) {
      case 'f':
        impl.alphabet.set_name(g, "a" + std::to_string(++free_count), false);
        break;
      case 'i':
        if (inv_count >= 6) throw input_error("model: too many involution generators");
        impl.alphabet.set_name(g, kInvNames[inv_count++], true);
        break;
      default:
        impl.alphabet.set_name(g, "t" + std::to_string(++fin_count), false);
        break;
    }
  }
}

}  // namespace

GroupModel GroupModel::free_group(int m) {
  if (m < 1) throw input_error("free_group: m must be >= 1");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::Free;
  impl->m = m;
  impl->gen_class.assign(m, 'f');
  impl->expr = "free(" + std::to_string(m) + ")";
  assign_names(*impl);
  return GroupModel(impl);
}

GroupModel GroupModel::cyclic(int n) {
  if (n < 2 || n > 64) throw input_error("cyclic: order out of range");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::Finite;
  impl->n_elements = n;
  impl->gen_class.assign(1, n == 2 ? 'i' : 't');
  impl->expr = "z" + std::to_string(n);
  assign_names(*impl);
  impl->mult.resize(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) impl->mult[i * n + j] = (i + j) % n;
  impl->letter_elem = {1 % n, (n - 1) % n};
  impl->canon.resize(n);
  impl->elem_norm.resize(n);
  for (int k = 0; k < n; ++k) {
    int back = n - k;
    if (k <= back) {
      impl->canon[k] = Word(static_cast<std::size_t>(k), Letter{0});
      impl->elem_norm[k] = k;
    } else {
      impl->canon[k] = Word(static_cast<std::size_t>(back), Letter{1});
      impl->elem_norm[k] = back;
    }
  }
  return GroupModel(impl);
}

GroupModel GroupModel::direct_with_finite(const GroupModel& inner,
                                          const GroupModel& finite) {
  if (finite.kind() != ModelKind::Finite)
    throw input_error("direct_with_finite: second factor must be finite");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::DirectWithFinite;
  impl->factors = {inner, finite};
  impl->offsets = {0, inner.alphabet().size()};
  impl->gen_class = inner.impl().gen_class;
  impl->gen_class.insert(impl->gen_class.end(), finite.impl().gen_class.begin(),
                         finite.impl().gen_class.end());
  impl->expr = "direct(" + inner.expr() + ", " + finite.expr() + ")";
  assign_names(*impl);
  for (int x = 0; x < impl->alphabet.size(); ++x)
    impl->letter_factor.push_back(x < impl->offsets[1] ? 0 : 1);
  return GroupModel(impl);
}

GroupModel GroupModel::free_product(const std::vector<GroupModel>& factors) {
  if (factors.size() < 2) throw input_error("free_product: need >= 2 factors");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::FreeProduct;
  impl->factors = factors;
  impl->expr = "freeprod(";
  int off = 0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    impl->offsets.push_back(off);
    off += factors[i].alphabet().size();
    impl->gen_class.insert(impl->gen_class.end(),
                           factors[i].impl().gen_class.begin(),
                           factors[i].impl().gen_class.end());
    impl->expr += (i ? ", " : "") + factors[i].expr();
  }
  impl->expr += ")";
  assign_names(*impl);
  for (std::size_t i = 0; i < factors.size(); ++i)
    for (int x = 0; x < factors[i].alphabet().size(); ++x)
      impl->letter_factor.push_back(static_cast<int>(i));
  return GroupModel(impl);
}

ModelKind GroupModel::kind() const { return impl_->kind; }
const Alphabet& GroupModel::alphabet() const { return impl_->alphabet; }
std::string GroupModel::expr() const { return impl_->expr; }

Word GroupModel::normal_form(const Word& w) const {
  const Impl& im = *impl_;
  im.alphabet.check(w);
  switch (im.kind) {
    case ModelKind::Free:
      return free_reduce(w);
    case ModelKind::Finite:
      return im.canon[im.fold_finite(w, 0)];
    case ModelKind::DirectWithFinite: {
      Word inner_part;
      Word finite_part;
      for (Letter x : w)
        (x < im.offsets[1] ? inner_part : finite_part).push_back(x);
      Word nf = im.factors[0].normal_form(inner_part);
      const Impl& fin = im.factors[1].impl();
      Word fw;
      for (Letter x : finite_part) fw.push_back(static_cast<Letter>(x - im.offsets[1]));
      for (Letter x : fin.canon[fin.fold_finite(fw, 0)])
        nf.push_back(static_cast<Letter>(x + im.offsets[1]));
      return nf;
    }
    case ModelKind::FreeProduct: {
      // Syllable stack; each kept in its factor's canonical form (locally
      // indexed).  Empty syllables are dropped as they appear.
      std::vector<std::pair<int, Word>> syl;
      for (Letter x : w) {
        int f = im.letter_factor[x];
        Letter lx = static_cast<Letter>(x - im.offsets[f]);
        if (!syl.empty() && syl.back().first == f) {
          syl.back().second.push_back(lx);
          syl.back().second = im.factors[f].normal_form(syl.back().second);
          if (syl.back().second.empty()) syl.pop_back();
        } else {
          Word s = im.factors[f].normal_form(Word{lx});
          if (!s.empty()) syl.emplace_back(f, std::move(s));
        }
      }
      Word out;
      for (const auto& [f, sw] : syl)
        for (Letter lx : sw) out.push_back(static_cast<Letter>(lx + im.offsets[f]));
      return out;
    }
  }
  throw numeric_error("normal_form: unreachable");
}

bool GroupModel::is_identity(const Word& w) const { return normal_form(w).empty(); }

long GroupModel::norm(const Word& w) const {
  const Impl& im = *impl_;
  switch (im.kind) {
    case ModelKind::Free:
      return static_cast<long>(free_reduce(w).size());
    case ModelKind::Finite: {
      im.alphabet.check(w);
      return im.elem_norm[im.fold_finite(w, 0)];
    }
    case ModelKind::DirectWithFinite:
    case ModelKind::FreeProduct: {
      // Norm is additive across syllables / components; the canonical form
      // is a concatenation of per-factor canonical words.
      Word nf = normal_form(w);
      long total = 0;
      std::size_t i = 0;
      while (i < nf.size()) {
        int f = im.letter_factor[nf[i]];
        Word run;
        while (i < nf.size() && im.letter_factor[nf[i]] == f)
          run.push_back(static_cast<Letter>(nf[i++] - im.offsets[f]));
        total += im.factors[f].norm(run);
      }
      return total;
    }
  }
  throw numeric_error("norm: unreachable");
}

int GroupModel::free_rank() const {
  return impl_->kind == ModelKind::Free ? impl_->m : -1;
}

int GroupModel::free_times_z2_rank() const {
  const Impl& im = *impl_;
  if (im.kind != ModelKind::DirectWithFinite) return -1;
  if (im.factors[0].kind() != ModelKind::Free) return -1;
  if (im.factors[1].impl().n_elements != 2) return -1;
  return im.factors[0].impl().m;
}

namespace {

struct Parser {
  const std::string& s;
  std::size_t i = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }

  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c))
      throw input_error(std::string("group expr: expected '") + c + "' at offset " +
                        std::to_string(i));
  }

  std::string ident() {
    skip();
    std::size_t j = i;
    while (j < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
      ++j;
    if (j == i) throw input_error("group expr: expected identifier");
    std::string out = s.substr(i, j - i);
    i = j;
    return out;
  }

  int integer() {
    std::string t = ident();
    try {
      return std::stoi(t);
    } catch (...) {
      throw input_error("group expr: expected integer, got '" + t + "'");
    }
  }

  GroupModel finite_by_name(const std::string& name) {
    if (name.size() >= 2 && name[0] == 'z') {
      try {
        return GroupModel::cyclic(std::stoi(name.substr(1)));
      } catch (const input_error&) {
        throw;
      } catch (...) {
      }
    }
    throw input_error("group expr: unknown finite group '" + name + "'");
  }

  GroupModel expr() {
    std::string head = ident();
    if (head == "free") {
      expect('(');
      int m = integer();
      expect(')');
      return GroupModel::free_group(m);
    }
    if (head == "finite") {
      expect('(');
      std::string name = ident();
      expect(')');
      return finite_by_name(name);
    }
    if (head == "direct") {
      expect('(');
      GroupModel inner = expr();
      expect(',');
      GroupModel fin = expr();
      expect(')');
      return GroupModel::direct_with_finite(inner, fin);
    }
    if (head == "freeprod") {
      expect('(');
      std::vector<GroupModel> factors;
      factors.push_back(expr());
      while (eat(',')) factors.push_back(expr());
      expect(')');
      return GroupModel::free_product(factors);
    }
    return finite_by_name(head);
  }
};

}  // namespace

GroupModel GroupModel::parse(const std::string& text) {
  Parser p(text);
  GroupModel g = p.expr();
  p.skip();
  if (p.i != text.size())
    throw input_error("group expr: trailing characters after expression");
  return g;
}

}  // namespace rq
