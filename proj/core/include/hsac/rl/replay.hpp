#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "hsac/policy/hybrid.hpp"
#include "hsac/rng.hpp"

namespace hsac {

// One stored step. The action is kept in policy space (every continuous slot
// squashed into (-1, 1)), with all slots present even when the environment
// only consumed the selected one: the critics condition on the full vector.
// `done` marks true terminals only; hitting the episode step cap is stored as
// not-done so the value bootstrap stays on.
struct Transition {
  Eigen::RowVectorXd s;
  HybridAction a;
  double r = 0.0;
  Eigen::RowVectorXd s_next;
  bool done = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  // FIFO: once full, each push overwrites the oldest stored transition.
  // Non-finite observations or reward throw ContractError.
  void push(Transition t);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_[i]; }

  // n independent uniform draws over the stored items, with replacement.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

}  // namespace hsac
