#include "bfrl/replay_buffer.hpp"

#include <stdexcept>
#include <utility>

namespace bfrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : rng_(seed) {
  if (capacity == 0) {
    throw std::invalid_argument("replay buffer capacity must be positive");
  }
  data_.resize(capacity);
}

void ReplayBuffer::push(Transition t) {
  data_[next_] = std::move(t);
  ++next_;
  if (next_ == data_.size()) {
    next_ = 0;
    full_ = true;
  }
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch) {
  if (batch == 0 || batch > size()) {
    throw std::logic_error("replay buffer: cannot sample " +
                           std::to_string(batch) + " of " +
                           std::to_string(size()) + " transitions");
  }
  std::uniform_int_distribution<std::size_t> dist(0, size() - 1);
  std::vector<const Transition*> out(batch);
  for (auto& ptr : out) {
    ptr = &data_[dist(rng_)];
  }
  return out;
}

}  // namespace bfrl
