#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rq/word.hpp"

namespace rq {

enum class ModelKind { Free, Finite, DirectWithFinite, FreeProduct };

// A group with decidable word problem over a fixed symmetric alphabet.
// Immutable after construction; safe for concurrent reads.
//
// Canonical forms:
//   Free            free reduction
//   Finite          lexicographically-least shortest word for the element
//   DirectWithFinite  (inner canonical form) . (finite canonical form)
//   FreeProduct     alternating syllables, each in its factor's canonical form
//
// The identity representative is the empty word in every variant.
class GroupModel {
 public:
  static GroupModel free_group(int m);
  static GroupModel cyclic(int n);  // Z/nZ on one generator
  static GroupModel direct_with_finite(const GroupModel& inner,
                                       const GroupModel& finite);
  static GroupModel free_product(const std::vector<GroupModel>& factors);

  // Grammar: free(m) | zN | finite(zN) | direct(expr, finite) |
  //          freeprod(expr, expr, ...)
  static GroupModel parse(const std::string& expr);

  ModelKind kind() const;
  const Alphabet& alphabet() const;
  std::string expr() const;

  Word normal_form(const Word& w) const;
  bool is_identity(const Word& w) const;

  // Exact geodesic length, computed compositionally (reduced length for
  // free factors, table distance for finite ones, sums across products).
  long norm(const Word& w) const;

  // Structure probes used by the exact return-probability chains.
  // free_rank() is m for Free(m), -1 otherwise.
  int free_rank() const;
  // free_times_z2_rank() is k for DirectWithFinite(Free(k), Z/2Z), -1 otherwise.
  int free_times_z2_rank() const;
  bool is_finite_variant() const { return kind() == ModelKind::Finite; }

  struct Impl;
  explicit GroupModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  const Impl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

}  // namespace rq
