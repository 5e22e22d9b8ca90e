#include "hsac/rl/replay.hpp"

#include <cmath>
#include <utility>

#include "hsac/errors.hpp"

namespace hsac {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer needs capacity >= 1");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (!t.s.allFinite() || !t.s_next.allFinite() || !std::isfinite(t.r))
    throw ContractError("replay: non-finite transition");
  for (const auto& c : t.a.continuous)
    if (!c.allFinite()) throw ContractError("replay: non-finite action");

  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n,
                                                      Rng& rng) const {
  if (items_.empty()) throw ContractError("replay: sampling from empty buffer");
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(items_.size())));
  return out;
}

}  // namespace hsac
