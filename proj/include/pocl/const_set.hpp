#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pocl {

inline constexpr int kMaxConstants = 256;

// Set of constant ids below kMaxConstants.
class ConstSet {
 public:
  ConstSet() = default;
  ConstSet(std::initializer_list<int> ids) {
    for (int i : ids) insert(i);
  }

  void insert(int c) { words_[c >> 6] |= uint64_t{1} << (c & 63); }
  void erase(int c) { words_[c >> 6] &= ~(uint64_t{1} << (c & 63)); }
  bool contains(int c) const { return (words_[c >> 6] >> (c & 63)) & 1; }
  bool empty() const {
    for (uint64_t w : words_)
      if (w) return false;
    return true;
  }
  int size() const {
    int n = 0;
    for (uint64_t w : words_) n += std::popcount(w);
    return n;
  }
  int first() const {
    for (int i = 0; i < 4; ++i)
      if (words_[i]) return i * 64 + std::countr_zero(words_[i]);
    return -1;
  }
  std::vector<int> elements() const {
    std::vector<int> out;
    for (int i = 0; i < 4; ++i) {
      uint64_t w = words_[i];
      while (w) {
        out.push_back(i * 64 + std::countr_zero(w));
        w &= w - 1;
      }
    }
    return out;
  }
  // Returns true when this set grew.
  bool unite(const ConstSet& o) {
    bool grew = false;
    for (int i = 0; i < 4; ++i) {
      uint64_t n = words_[i] | o.words_[i];
      grew = grew || n != words_[i];
      words_[i] = n;
    }
    return grew;
  }
  void intersect(const ConstSet& o) {
    for (int i = 0; i < 4; ++i) words_[i] &= o.words_[i];
  }
  bool subset_of(const ConstSet& o) const {
    for (int i = 0; i < 4; ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }
  friend bool operator==(const ConstSet&, const ConstSet&) = default;

 private:
  std::array<uint64_t, 4> words_{};
};

// A variable domain: either TOP (unconstrained) or a finite set.
struct Domain {
  bool top = true;
  ConstSet set;

  static Domain any() { return Domain{}; }
  static Domain of(const ConstSet& s) { return Domain{false, s}; }
  static Domain none() { return Domain{false, ConstSet{}}; }

  bool contains(int c) const { return top || set.contains(c); }
  bool empty() const { return !top && set.empty(); }
  void intersect(const Domain& o) {
    if (o.top) return;
    if (top) {
      *this = o;
      return;
    }
    set.intersect(o.set);
  }
  // Returns true when the domain grew.
  bool unite(const Domain& o) {
    if (top) return false;
    if (o.top) {
      top = true;
      set = ConstSet{};
      return true;
    }
    return set.unite(o.set);
  }
  friend bool operator==(const Domain&, const Domain&) = default;
};

}  // namespace pocl
