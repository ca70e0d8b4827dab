#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace bfrl {

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;  // the shaped reward when shaping is active
  std::vector<double> next_state;
  bool done = false;
};

class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void push(Transition t);
  std::size_t size() const { return full_ ? data_.size() : next_; }
  std::size_t capacity() const { return data_.size(); }

  // Uniform sample with replacement; throws std::logic_error when fewer than
  // `batch` transitions are stored.
  std::vector<const Transition*> sample(std::size_t batch);

 private:
  std::vector<Transition> data_;
  std::size_t next_ = 0;
  bool full_ = false;
  std::mt19937_64 rng_;
};

}  // namespace bfrl
