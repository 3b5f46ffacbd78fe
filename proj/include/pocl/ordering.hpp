#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pocl {

inline constexpr int kStartStep = 0;
inline constexpr int kEndStep = 1;
inline constexpr int kMaxSteps = 256;

// Transitively closed strict partial order over step ids.
class Ordering {
 public:
  Ordering() {
    add_step();
    add_step();
    set(kStartStep, kEndStep);
  }

  int size() const { return n_; }

  // New steps lie between start and end.
  int add_step() {
    if (n_ >= kMaxSteps) throw std::runtime_error("step limit exceeded");
    int s = n_++;
    rows_.resize(static_cast<size_t>(n_) * kWords, 0);
    if (s > kEndStep) {
      for (int x = 0; x < n_; ++x)
        if (x == kStartStep || before(x, kStartStep)) set(x, s);
      set(s, kEndStep);
      for (int y = 0; y < n_; ++y)
        if (before(kEndStep, y)) set(s, y);
    }
    return s;
  }

  bool before(int a, int b) const {
    return (rows_[static_cast<size_t>(a) * kWords + (b >> 6)] >> (b & 63)) & 1;
  }

  // Adds a < b and closes; false if that would create a cycle.
  bool constrain(int a, int b) {
    if (a == b || before(b, a)) return false;
    if (before(a, b)) return true;
    const uint64_t* rb = &rows_[static_cast<size_t>(b) * kWords];
    std::array<uint64_t, kWords> add{};
    for (int w = 0; w < kWords; ++w) add[w] = rb[w];
    add[b >> 6] |= uint64_t{1} << (b & 63);
    for (int x = 0; x < n_; ++x) {
      if (x != a && !before(x, a)) continue;
      uint64_t* rx = &rows_[static_cast<size_t>(x) * kWords];
      for (int w = 0; w < kWords; ++w) rx[w] |= add[w];
    }
    return true;
  }

  // Neither s <= producer nor consumer <= s is entailed.
  bool possibly_between(int s, int producer, int consumer) const {
    if (s == producer || s == consumer) return false;
    return !before(s, producer) && !before(consumer, s);
  }

 private:
  static constexpr int kWords = kMaxSteps / 64;

  void set(int a, int b) { rows_[static_cast<size_t>(a) * kWords + (b >> 6)] |= uint64_t{1} << (b & 63); }

  int n_ = 0;
  std::vector<uint64_t> rows_;
};

}  // namespace pocl
