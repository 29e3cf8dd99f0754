#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vrdqn/rng.hpp"
#include "vrdqn/transition.hpp"

namespace vrdqn {

// FIFO experience memory. Past capacity the oldest item is evicted; sampling
// is uniform with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : capacity_(capacity) {
    if (capacity <= 0)
      throw std::invalid_argument("replay capacity must be positive");
    items_.reserve(static_cast<std::size_t>(capacity));
  }

  void push(Transition t) {
    if (size() < static_cast<std::size_t>(capacity_)) {
      items_.push_back(std::move(t));
    } else {
      items_[head_] = std::move(t);
      head_ = (head_ + 1) % static_cast<std::size_t>(capacity_);
    }
    ++total_pushed_;
  }

  std::size_t size() const { return items_.size(); }
  long total_pushed() const { return total_pushed_; }

  // i-th oldest item.
  const Transition& operator[](std::size_t i) const {
    if (i >= size()) throw std::out_of_range("replay index out of range");
    return items_[(head_ + i) % items_.size()];
  }

  // Push index (0-based since the start of the run) of the i-th oldest item;
  // eviction is strictly FIFO so the mapping is arithmetic.
  long push_id(std::size_t i) const {
    return total_pushed_ - static_cast<long>(size()) + static_cast<long>(i);
  }

  std::vector<std::size_t> sample_positions(int n, Rng& rng) const {
    if (items_.empty())
      throw std::invalid_argument("cannot sample from an empty replay buffer");
    if (n < 0) throw std::invalid_argument("sample size must be >= 0");
    std::vector<std::size_t> out(static_cast<std::size_t>(n));
    for (auto& p : out)
      p = static_cast<std::size_t>(rng.next_below(static_cast<int>(size())));
    return out;
  }

  std::vector<Transition> sample_batch(int n, Rng& rng) const {
    std::vector<Transition> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::size_t p : sample_positions(n, rng)) out.push_back((*this)[p]);
    return out;
  }

 private:
  int capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // position of the oldest item
  long total_pushed_ = 0;
};

}  // namespace vrdqn
