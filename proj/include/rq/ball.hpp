#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rq/model.hpp"

namespace rq {

// Exact Cayley ball: complete BFS to the requested radius with per-element
// canonical forms, norms and letter adjacency.  Adjacency entries leading
// outside the ball are kNoEdge.
class CayleyBall {
 public:
  static constexpr std::int32_t kNoEdge = -1;

  CayleyBall(const GroupModel& model, int radius, std::size_t node_budget);

  const GroupModel& model() const { return model_; }
  int radius() const { return radius_; }
  std::size_t size() const { return elements_.size(); }

  const Word& element(std::size_t id) const { return elements_[id]; }
  int norm_of(std::size_t id) const { return norms_[id]; }

  // id of a canonical form, or -1 when absent.
  std::int32_t find(const Word& canonical) const;

  std::int32_t neighbor(std::size_t id, Letter x) const {
    return adjacency_[id * letters_ + x];
  }
  int letters() const { return letters_; }

  std::size_t sphere_size(int r) const;
  std::vector<std::size_t> sphere_sizes() const;

  // All elements with norm in [ell - L, ell + L], in BFS (norm-major) order.
  std::vector<Word> sphere_slice(int ell, int L) const;

 private:
  GroupModel model_;
  int radius_;
  int letters_;
  std::vector<Word> elements_;
  std::vector<int> norms_;
  std::vector<std::int32_t> adjacency_;
  std::unordered_map<std::string, std::int32_t> index_;
};

inline CayleyBall cayley_ball(const GroupModel& model, int radius,
                              std::size_t node_budget = 5000000) {
  return CayleyBall(model, radius, node_budget);
}

}  // namespace rq
