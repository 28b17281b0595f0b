#include "rq/ball.hpp"

#include <string>

#include "rq/errors.hpp"

namespace rq {

namespace {
std::string key_of(const Word& w) {
  return std::string(reinterpret_cast<const char*>(w.data()), w.size());
}
}  // namespace

CayleyBall::CayleyBall(const GroupModel& model, int radius, std::size_t node_budget)
    : model_(model), radius_(radius), letters_(model.alphabet().size()) {
  if (radius < 0) throw input_error("cayley_ball: negative radius");

  elements_.push_back(Word{});
  norms_.push_back(0);
  index_.emplace(std::string{}, 0);

  std::size_t level_begin = 0;
  for (int r = 0; r < radius; ++r) {
    std::size_t level_end = elements_.size();
    for (std::size_t id = level_begin; id < level_end; ++id) {
      for (int x = 0; x < letters_; ++x) {
        Word w = elements_[id];
        w.push_back(static_cast<Letter>(x));
        Word nf = model_.normal_form(w);
        std::string key = key_of(nf);
        if (index_.find(key) != index_.end()) continue;
        if (elements_.size() >= node_budget)
          throw capacity_error("cayley_ball: node budget " +
                               std::to_string(node_budget) +
                               " exceeded; radius reached " + std::to_string(r));
        index_.emplace(std::move(key), static_cast<std::int32_t>(elements_.size()));
        elements_.push_back(std::move(nf));
        norms_.push_back(r + 1);
      }
    }
    level_begin = level_end;
  }

  adjacency_.assign(elements_.size() * letters_, kNoEdge);
  for (std::size_t id = 0; id < elements_.size(); ++id) {
    for (int x = 0; x < letters_; ++x) {
      Word w = elements_[id];
      w.push_back(static_cast<Letter>(x));
      auto it = index_.find(key_of(model_.normal_form(w)));
      if (it != index_.end()) adjacency_[id * letters_ + x] = it->second;
    }
  }
}

std::int32_t CayleyBall::find(const Word& canonical) const {
  auto it = index_.find(key_of(canonical));
  return it == index_.end() ? -1 : it->second;
}

std::size_t CayleyBall::sphere_size(int r) const {
  if (r < 0 || r > radius_) throw capacity_error("sphere_size: radius insufficient");
  std::size_t n = 0;
  for (int v : norms_) n += (v == r);
  return n;
}

std::vector<std::size_t> CayleyBall::sphere_sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(radius_) + 1, 0);
  for (int v : norms_) ++out[v];
  return out;
}

std::vector<Word> CayleyBall::sphere_slice(int ell, int L) const {
  if (L < 0 || ell < 0) throw input_error("sphere_slice: negative arguments");
  if (ell + L > radius_)
    throw capacity_error("sphere_slice: need radius >= " + std::to_string(ell + L) +
                         ", ball has " + std::to_string(radius_));
  std::vector<Word> out;
  for (std::size_t id = 0; id < elements_.size(); ++id)
    if (norms_[id] >= ell - L && norms_[id] <= ell + L) out.push_back(elements_[id]);
  return out;
}

}  // namespace rq
